#pragma once

#include <chrono>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace polurl {

enum class Country { FR, DE, ES, UK, US };
inline constexpr Country kAllCountries[] = {Country::FR, Country::DE, Country::ES, Country::UK,
                                            Country::US};

std::string_view to_string(Country c);
std::optional<Country> parse_country(std::string_view s);

// Human gold label.
enum class Label { POL, NON };
std::string_view to_string(Label l);
std::optional<Label> parse_label(std::string_view s);

// Input modality of a classification run.
enum class Mode { full_text, url_only };
std::string_view to_string(Mode m);
// Accepts "full_text"/"text" and "url_only"/"url".
std::optional<Mode> parse_mode(std::string_view s);
// "text" / "url", the short form used in file names and CLI flags.
std::string_view short_name(Mode m);

using UtcInstant = std::chrono::sys_time<std::chrono::milliseconds>;

// RFC 3339 timestamp, e.g. 2022-02-22T10:15:00Z or 2022-02-22T11:15:00.250+01:00.
std::optional<UtcInstant> parse_rfc3339(std::string_view s);
// Always rendered in UTC with a trailing Z; milliseconds only when non-zero.
std::string format_rfc3339(UtcInstant t);
UtcInstant utc_now();

// Input data does not match its declared schema or a stage precondition.
class DataError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

std::string to_lower_ascii(std::string_view s);
std::string trim(std::string_view s);
std::vector<std::string> split(std::string_view s, char sep);

// Number of UTF-8 code points, counted as lead (non-continuation) bytes.
std::size_t utf8_length(std::string_view s);
// Longest prefix holding at most `max_chars` code points.
std::string_view utf8_prefix(std::string_view s, std::size_t max_chars);

std::string read_file(const std::string& path);
// Writes only when the content differs; returns true if the file was (re)written.
bool write_file_if_changed(const std::string& path, std::string_view content);

}  // namespace polurl

// Writes the offline synthetic corpus used by the end-to-end tests:
// visit log, outlet lists, HTML snapshot, gold labels and a run config.
//
//   make_synthetic_corpus <out_dir> [--seed N]

#include <filesystem>
#include <iostream>
#include <random>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <nlohmann/json.hpp>

#include "polurl/common.hpp"
#include "polurl/gateway/lexicon.hpp"
#include "polurl/random.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using polurl::Country;

namespace {

struct Language {
  std::vector<std::string> pol_lex;     // political, with lexicon words
  std::vector<std::string> pol_plain;   // political topic, no lexicon word
  std::vector<std::string> non_plain;   // non-political
  std::vector<std::string> non_lex;     // non-political but hits the lexicon
  std::vector<std::string> slug_pol;    // slug words, one is a lexicon word
  std::vector<std::string> slug_pol_plain;
  std::vector<std::string> slug_non;
  std::vector<std::string> slug_non_lex;  // first entry is a lexicon word
  std::vector<std::string> sections_pol, sections_non;
};

const Language kEnglish{
    {"Parliament approved the budget after a late-night session on Thursday.",
     "The government announced a new plan to cut waiting lists in hospitals.",
     "Opposition leaders accused the minister of misleading lawmakers.",
     "Voters will head to the polls in May for the local elections.",
     "The senate is expected to debate the coalition agreement next week.",
     "The cabinet met to discuss the referendum on electoral reform."},
    {"The new tax bill passed its final reading after a long debate.",
     "Ministries across the capital were asked to trim spending plans.",
     "Campaigners gathered outside the assembly to demand pension changes.",
     "Officials defended the healthcare overhaul during a heated hearing.",
     "The public inquiry into housing policy published its findings today.",
     "Negotiators reached a deal on the border treaty late on Monday."},
    {"The home side scored twice in the second half to seal the win.",
     "Forecasters expect heavy rain and strong winds across the coast tomorrow.",
     "The museum reopened its modern art wing after a two-year renovation.",
     "This slow-cooked stew needs only five ingredients and an afternoon.",
     "Astronomers spotted a comet that will be visible from the northern sky.",
     "The festival sold out within hours as fans queued through the night."},
    {"The club president thanked the fans after the final match of the season.",
     "The governor of the central bank spoke at a jazz festival on Sunday.",
     "Voters in the talent show picked a teenage singer as the winner."},
    {"parliament", "election", "government", "minister", "senate", "coalition", "referendum",
     "lawmakers", "cabinet", "voters"},
    {"tax", "bill", "passes", "pension", "reform", "debate", "housing", "policy", "treaty"},
    {"football", "recipe", "weather", "storm", "concert", "festival", "museum", "travel",
     "market", "film", "review", "garden", "science", "space", "league", "chef"},
    {"president", "club", "resigns", "after", "defeat"},
    {"politics", "uk-politics", "us-news"},
    {"sport", "culture", "lifestyle", "science"}};

const Language kFrench{
    {"Le gouvernement a présenté un nouveau projet de loi mercredi matin.",
     "L'Assemblée nationale a adopté le texte en première lecture.",
     "Le ministre a défendu la réforme devant les députés.",
     "Les élections législatives auront lieu au mois de juin.",
     "Le Sénat examinera la proposition la semaine prochaine.",
     "Le président a réuni les chefs de parti à l'Élysée."},
    {"La réforme des retraites a été adoptée après un long débat.",
     "Les syndicats appellent à une nouvelle journée de mobilisation.",
     "Le budget de la santé sera revu à la baisse selon plusieurs sources.",
     "Une commission d'enquête publiera son rapport avant l'été.",
     "Les négociations sur le traité frontalier ont repris lundi.",
     "La loi sur le logement suscite de vives critiques."},
    {"L'équipe locale a marqué deux fois en seconde période.",
     "Météo France annonce de fortes pluies sur la côte atlantique.",
     "Le musée rouvre son aile consacrée à l'art moderne.",
     "Cette recette de ratatouille demande peu d'ingrédients.",
     "Les astronomes ont observé une comète au-dessus des Alpes.",
     "Le festival a affiché complet en quelques heures."},
    {"Le président du club a remercié les supporters après le match.",
     "Le vote du public a désigné la meilleure chanson du concours.",
     "La politique tarifaire du musée attire davantage de familles."},
    {"gouvernement", "ministre", "parlement", "elections", "macron", "politique"},
    {"retraites", "reforme", "budget", "syndicats", "traite", "logement", "loi"},
    {"football", "recette", "meteo", "musee", "festival", "cinema", "voyage", "jardin",
     "astronomie", "rugby", "chanson"},
    {"president", "club", "demission", "defaite", "saison"},
    {"politique", "elections", "international"},
    {"sport", "culture", "m-perso", "sciences"}};

const Language kGerman{
    {"Der Bundestag hat am Donnerstag über den Haushalt abgestimmt.",
     "Die Regierung kündigte eine neue Reform der Rente an.",
     "Der Kanzler verteidigte die Pläne vor den Abgeordneten.",
     "Die Koalition streitet weiter über den Klimaschutz.",
     "Bei der Wahl in Bayern legte die Partei deutlich zu.",
     "Der Bundesrat muss dem Gesetz noch zustimmen."},
    {"Die Steuerreform wurde nach langer Debatte beschlossen.",
     "Die Gewerkschaften kündigten neue Streiks im Nahverkehr an.",
     "Das Gesundheitsministerium prüft Kürzungen im Etat.",
     "Ein Untersuchungsausschuss soll die Vorgänge aufklären.",
     "Die Verhandlungen über den Grenzvertrag wurden fortgesetzt.",
     "Das neue Mietrecht stößt auf heftige Kritik."},
    {"Die Heimmannschaft traf zweimal in der zweiten Halbzeit.",
     "Der Wetterdienst erwartet Sturm und Regen an der Küste.",
     "Das Museum zeigt wieder seine Sammlung moderner Kunst.",
     "Dieses Rezept für Gulasch braucht nur wenige Zutaten.",
     "Astronomen entdeckten einen Kometen am Nordhimmel.",
     "Das Festival war innerhalb weniger Stunden ausverkauft."},
    {"Die Wahl des neuen Trainers überraschte die Fans.",
     "Der Kanzler der Universität eröffnete die Kunstausstellung.",
     "Die Regierung des Vereins lobte die Jugendarbeit."},
    {"bundestag", "regierung", "kanzler", "koalition", "wahl", "partei", "landtag"},
    {"steuerreform", "rente", "gewerkschaften", "mietrecht", "haushalt", "gesetz"},
    {"fussball", "rezept", "wetter", "museum", "festival", "kino", "reise", "garten",
     "astronomie", "bundesliga", "musik"},
    {"wahl", "trainer", "verein", "fans", "saison"},
    {"politik", "deutschland", "ausland"},
    {"sport", "kultur", "wissen", "reise"}};

const Language kSpanish{
    {"El Gobierno aprobó ayer el nuevo presupuesto para el próximo año.",
     "El Congreso debatirá la reforma la próxima semana.",
     "La ministra defendió el plan ante los diputados.",
     "Las elecciones autonómicas se celebrarán en mayo.",
     "El presidente reunió a los líderes de cada partido.",
     "El Senado aplazó la votación por falta de acuerdo."},
    {"La reforma fiscal fue aprobada tras un largo debate.",
     "Los sindicatos convocaron una nueva huelga general.",
     "El presupuesto de sanidad se reducirá según varias fuentes.",
     "Una comisión de investigación publicará su informe en verano.",
     "Las negociaciones del tratado fronterizo se reanudaron el lunes.",
     "La ley de vivienda ha recibido duras críticas."},
    {"El equipo local marcó dos goles en la segunda parte.",
     "La agencia de meteorología prevé lluvias intensas en la costa.",
     "El museo reabre su sala dedicada al arte moderno.",
     "Esta receta de paella necesita pocos ingredientes.",
     "Los astrónomos observaron un cometa sobre los Pirineos.",
     "El festival agotó las entradas en pocas horas."},
    {"El presidente del club agradeció el apoyo a los aficionados.",
     "La votación del público eligió la mejor canción del concurso.",
     "El gobierno del club anunció obras en el estadio."},
    {"gobierno", "congreso", "elecciones", "ministra", "senado", "psoe", "diputados"},
    {"reforma", "fiscal", "sindicatos", "huelga", "vivienda", "tratado", "ley"},
    {"futbol", "receta", "tiempo", "museo", "festival", "cine", "viajes", "jardin",
     "astronomia", "liga", "musica"},
    {"presidente", "club", "dimite", "derrota", "temporada"},
    {"politica", "espana", "internacional"},
    {"deportes", "cultura", "ciencia", "gastronomia"}};

const Language& language_of(Country c) {
  switch (c) {
    case Country::FR: return kFrench;
    case Country::DE: return kGerman;
    case Country::ES: return kSpanish;
    default: return kEnglish;
  }
}

std::vector<std::string> outlets_of(Country c) {
  switch (c) {
    case Country::FR: return {"lemonde.fr", "lefigaro.fr", "liberation.fr"};
    case Country::DE: return {"spiegel.de", "zeit.de", "faz.net"};
    case Country::ES: return {"elpais.com", "elmundo.es", "abc.es"};
    case Country::UK: return {"bbc.co.uk", "theguardian.com", "thetimes.co.uk"};
    case Country::US: return {"nytimes.com", "foxnews.com", "washingtonpost.com"};
  }
  return {};
}

const std::vector<std::string> kOtherSites = {"www.google.com", "www.youtube.com",
                                              "en.wikipedia.org", "www.amazon.com",
                                              "www.instagram.com"};

class Gen {
 public:
  explicit Gen(std::uint64_t seed) : rng_(seed) {}
  std::size_t below(std::size_t n) { return polurl::uniform_below(rng_, n); }
  template <typename T>
  const T& pick(const std::vector<T>& v) {
    return v[below(v.size())];
  }
  std::vector<std::string> pick_distinct(const std::vector<std::string>& v, std::size_t k) {
    std::vector<std::string> pool = v;
    std::vector<std::string> out;
    for (std::size_t i = 0; i < k && !pool.empty(); ++i) {
      const auto j = below(pool.size());
      out.push_back(pool[j]);
      pool.erase(pool.begin() + static_cast<std::ptrdiff_t>(j));
    }
    return out;
  }

 private:
  std::mt19937_64 rng_;
};

bool hits_lexicon(const std::string& text) {
  for (const auto& t : polurl::gateway::lexicon_tokens(text))
    if (polurl::gateway::political_lexicon().count(t)) return true;
  return false;
}

std::string join(const std::vector<std::string>& parts, const std::string& sep) {
  std::string out;
  for (const auto& p : parts) out += (out.empty() ? "" : sep) + p;
  return out;
}

// Which URL/text behaviour an item gets from the lexicon mock.
enum class UrlKind { lexicon, plain, skip_words, skip_encoded, skip_empty };
enum class TextKind { lexicon, plain };
enum class FetchKind { ok, missing, redirect_ok, redirect_loop };

struct Item {
  std::string id;
  Country country;
  polurl::Label label;
  std::string url;
  UrlKind url_kind;
  TextKind text_kind;
  FetchKind fetch_kind;
  std::string title;
  std::vector<std::string> paragraphs;
};

std::string paragraph(Gen& g, const std::vector<std::string>& main,
                      const std::vector<std::string>& filler, bool use_main) {
  std::vector<std::string> s;
  if (use_main) s.push_back(g.pick(main));
  for (const auto& f : g.pick_distinct(filler, use_main ? 2 : 3)) s.push_back(f);
  return join(s, " ");
}

std::string html_page(const Item& it, const std::string& outlet) {
  std::string h = "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>" + it.title +
                  " | " + outlet + "</title>\n<script>window.dataLayer=[];</script></head>\n<body>\n";
  h += "<header><nav><a href=\"/\">Home</a> <a href=\"/politics\">Politics</a> "
       "<a href=\"/sport\">Sport</a> <a href=\"/culture\">Culture</a></nav></header>\n";
  h += "<main><article><h1>" + it.title + "</h1>\n";
  for (const auto& p : it.paragraphs) h += "<p>" + p + "</p>\n";
  h += "</article>\n<aside><p>Most read: government shake-up, election latest, minister "
       "resigns</p></aside></main>\n";
  h += "<footer><p>&copy; 2022 " + outlet + ". Politics newsletter: sign up.</p></footer>\n";
  h += "</body></html>\n";
  return h;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Generate the synthetic polurl corpus"};
  std::string out_dir;
  std::uint64_t seed = 20240601;
  app.add_option("out_dir", out_dir, "Output directory")->required();
  app.add_option("--seed", seed, "Generator seed");
  CLI11_PARSE(app, argc, argv);

  Gen g(seed);
  std::vector<Item> items;
  std::vector<std::vector<std::string>> visit_rows;
  std::vector<json> snapshot;
  std::vector<json> gold;
  const std::string base_day = "2022-03-";
  int visit_no = 0;

  for (std::size_t ci = 0; ci < std::size(polurl::kAllCountries); ++ci) {
    const Country c = polurl::kAllCountries[ci];
    const auto& lang = language_of(c);
    const auto outlets = outlets_of(c);
    const std::string cc = polurl::to_lower_ascii(polurl::to_string(c));
    // Per-country variation in how many items each planted error affects.
    const std::size_t url_fn = 3 + ci;
    const std::size_t url_fp = 2 + ci % 3;
    const std::size_t text_fn = 2 + ci % 2;
    const std::size_t text_fp = 1 + ci % 3;

    for (int k = 0; k < 80; ++k) {
      Item it;
      it.country = c;
      const bool pol = k < 40;
      const std::size_t j = static_cast<std::size_t>(pol ? k : k - 40);
      it.label = pol ? polurl::Label::POL : polurl::Label::NON;
      char idbuf[32];
      std::snprintf(idbuf, sizeof idbuf, "v-%s-%03d", cc.c_str(), k);
      it.id = idbuf;

      // URL behaviour.
      if (j >= 34) {
        it.url_kind = j < 37 ? UrlKind::skip_words : (j < 39 ? UrlKind::skip_encoded : UrlKind::skip_empty);
      } else if (pol) {
        it.url_kind = j < 34 - url_fn ? UrlKind::lexicon : UrlKind::plain;
      } else {
        it.url_kind = j < 34 - url_fp ? UrlKind::plain : UrlKind::lexicon;
      }
      // Text behaviour.
      if (pol) {
        it.text_kind = j < 40 - text_fn ? TextKind::lexicon : TextKind::plain;
      } else {
        it.text_kind = j < 40 - text_fp ? TextKind::plain : TextKind::lexicon;
      }
      it.fetch_kind = j == 10 || j == 11 ? FetchKind::missing
                      : j == 12          ? (pol ? FetchKind::redirect_ok : FetchKind::redirect_loop)
                                         : FetchKind::ok;

      const std::string& outlet = outlets[j % outlets.size()];
      const std::string host = "https://www." + outlet;
      const std::string section = pol ? g.pick(lang.sections_pol) : g.pick(lang.sections_non);
      const std::string numeric_id = std::to_string(60000000 + g.below(9000000));
      std::string path;
      switch (it.url_kind) {
        case UrlKind::lexicon: {
          std::vector<std::string> words;
          if (pol) {
            words = g.pick_distinct(lang.slug_pol, 1);
            for (const auto& w : g.pick_distinct(lang.slug_pol_plain, 2)) words.push_back(w);
          } else {
            const std::vector<std::string> rest(lang.slug_non_lex.begin() + 1, lang.slug_non_lex.end());
            words = {lang.slug_non_lex.front()};
            for (const auto& w : g.pick_distinct(rest, 2)) words.push_back(w);
          }
          path = "/" + section + "/" + join(words, "-") + "-" + numeric_id;
          break;
        }
        case UrlKind::plain: {
          const auto words = g.pick_distinct(pol ? lang.slug_pol_plain : lang.slug_non, 3);
          path = "/" + (pol ? std::string("news") : section) + "/" + join(words, "-") + "-" + numeric_id;
          break;
        }
        case UrlKind::skip_words:
          path = "/" + std::string(j % 2 ? "world-europe" : "uk-wales") + "-" + numeric_id;
          break;
        case UrlKind::skip_encoded: {
          static const char* hex = "0123456789abcdef";
          std::string h;
          for (int q = 0; q < 12; ++q) h.push_back(hex[g.below(16)]);
          path = "/" + h;
          break;
        }
        case UrlKind::skip_empty:
          path = "/?id=" + numeric_id;
          break;
      }
      if (path.find('?') == std::string::npos) path += ".html";
      it.url = host + path;

      // Article body: three paragraphs, only the first carries the planted cue.
      const auto& main = pol ? (it.text_kind == TextKind::lexicon ? lang.pol_lex : lang.pol_plain)
                             : (it.text_kind == TextKind::lexicon ? lang.non_lex : lang.non_plain);
      const auto& filler = pol ? lang.pol_plain : lang.non_plain;
      it.paragraphs.push_back(paragraph(g, main, filler, true));
      it.paragraphs.push_back(paragraph(g, main, filler, false));
      it.paragraphs.push_back(paragraph(g, main, filler, false));
      it.title = it.paragraphs.front().substr(0, it.paragraphs.front().find('.'));

      const std::string expect_url = it.url_kind == UrlKind::lexicon ? "Yes"
                                     : it.url_kind == UrlKind::plain ? "No"
                                                                     : "SKIP";
      const auto url_answer = json::parse(
          polurl::gateway::lexicon_classify(it.url, polurl::Mode::url_only, true));
      if (url_answer.at("Answer") != expect_url) {
        std::cerr << "generator bug: lexicon expectation broken for URL " << it.url << '\n';
        return 1;
      }
      const std::string body_text = join(it.paragraphs, "\n\n");
      const bool expect_text_yes = it.text_kind == TextKind::lexicon;
      if (hits_lexicon(body_text) != expect_text_yes) {
        std::cerr << "generator bug: lexicon expectation broken for text of " << it.id << '\n';
        return 1;
      }
      items.push_back(it);
    }
  }

  // Visit log: news visits plus non-news noise, interleaved by timestamp.
  for (const auto& it : items) {
    const std::string cc = polurl::to_lower_ascii(polurl::to_string(it.country));
    const int minute = visit_no % 1440;
    char ts[40];
    std::snprintf(ts, sizeof ts, "%s%02dT%02d:%02d:%02dZ", base_day.c_str(), 1 + visit_no % 28,
                  minute / 60, minute % 60, static_cast<int>(g.below(60)));
    visit_rows.push_back({it.id, "p-" + cc + "-" + std::to_string(g.below(25)), it.url, ts,
                          std::to_string(5 + g.below(600)),
                          std::vector<std::string>{"desktop", "mobile", "tablet"}[g.below(3)],
                          std::string(polurl::to_string(it.country))});
    ++visit_no;
  }
  for (const Country c : polurl::kAllCountries) {
    const std::string cc = polurl::to_lower_ascii(polurl::to_string(c));
    for (int k = 0; k < 20; ++k) {
      char id[32];
      std::snprintf(id, sizeof id, "v-%s-x%02d", cc.c_str(), k);
      char ts[40];
      std::snprintf(ts, sizeof ts, "%s%02dT%02d:%02d:00Z", base_day.c_str(), 1 + k, k % 24, k);
      visit_rows.push_back({id, "p-" + cc + "-" + std::to_string(g.below(25)),
                            "https://" + g.pick(kOtherSites) + "/results?q=" + std::to_string(k), ts,
                            std::to_string(g.below(120)), "mobile",
                            std::string(polurl::to_string(c))});
    }
  }
  // Two malformed rows: a relative URL and a negative duration.
  visit_rows.push_back({"v-bad-1", "p-x", "/no/scheme", "2022-03-01T00:00:00Z", "3", "desktop", "FR"});
  visit_rows.push_back(
      {"v-bad-2", "p-x", "https://www.lemonde.fr/x", "2022-03-01T00:00:00Z", "-4", "desktop", "FR"});

  // Snapshot pages.
  const std::string captured = "2022-03-30T12:00:00Z";
  for (const auto& it : items) {
    const std::string outlet = it.url.substr(12, it.url.find('/', 12) - 12);
    switch (it.fetch_kind) {
      case FetchKind::ok:
        snapshot.push_back({{"url", it.url},
                            {"status", 200},
                            {"content_type", "text/html; charset=utf-8"},
                            {"body", html_page(it, outlet)},
                            {"captured_at", captured}});
        break;
      case FetchKind::missing:
        snapshot.push_back({{"url", it.url},
                            {"status", 404},
                            {"content_type", "text/html"},
                            {"body", "<html><body><h1>Not found</h1></body></html>"},
                            {"captured_at", captured}});
        break;
      case FetchKind::redirect_ok: {
        const std::string target = "https://www." + outlet + "/amp" + it.url.substr(12 + outlet.size());
        snapshot.push_back({{"url", it.url}, {"status", 301}, {"location", target}, {"captured_at", captured}});
        snapshot.push_back({{"url", target},
                            {"status", 200},
                            {"content_type", "text/html; charset=utf-8"},
                            {"body", html_page(it, outlet)},
                            {"captured_at", captured}});
        break;
      }
      case FetchKind::redirect_loop: {
        const std::string other = it.url + "?r=1";
        snapshot.push_back({{"url", it.url}, {"status", 302}, {"location", other}, {"captured_at", captured}});
        snapshot.push_back({{"url", other}, {"status", 302}, {"location", it.url}, {"captured_at", captured}});
        break;
      }
    }
  }

  // Gold: every fifteenth item went through adjudication.
  for (std::size_t i = 0; i < items.size(); ++i) {
    const auto& it = items[i];
    const std::string lbl(polurl::to_string(it.label));
    const std::string other = it.label == polurl::Label::POL ? "NON" : "POL";
    if (i % 15 == 7) {
      gold.push_back({{"item_id", it.id}, {"coder_a", lbl}, {"coder_b", other},
                      {"adjudicated", lbl}, {"final", lbl}, {"status", "adjudicated"}});
    } else {
      gold.push_back({{"item_id", it.id}, {"coder_a", lbl}, {"coder_b", lbl},
                      {"adjudicated", nullptr}, {"final", lbl}, {"status", "agreed"}});
    }
  }

  fs::create_directories(out_dir);
  const fs::path dir(out_dir);
  std::string csv = "visit_id,panelist_id,url,timestamp,duration_seconds,device,country\n";
  for (const auto& r : visit_rows) csv += join(r, ",") + "\n";
  polurl::write_file_if_changed((dir / "visits.csv").string(), csv);
  for (const Country c : polurl::kAllCountries) {
    std::string list = "# synthetic outlet list, " + std::string(polurl::to_string(c)) + "\n";
    for (const auto& o : outlets_of(c)) list += o + "\n";
    polurl::write_file_if_changed(
        (dir / ("outlets_" + polurl::to_lower_ascii(polurl::to_string(c)) + ".txt")).string(), list);
  }
  std::string snap;
  for (const auto& s : snapshot) snap += s.dump() + "\n";
  polurl::write_file_if_changed((dir / "snapshot.jsonl").string(), snap);
  std::string gl;
  for (const auto& r : gold) gl += r.dump() + "\n";
  polurl::write_file_if_changed((dir / "gold.jsonl").string(), gl);

  const std::string config =
      "; Synthetic corpus run. Paths are relative to this file.\n"
      "[run]\n"
      "dataset_id = synthetic-v1\n"
      "seed = " + std::to_string(seed) + "\n"
      "visits = visits.csv\n"
      "sample_per_country = 80\n"
      "snapshot = snapshot.jsonl\n"
      "gold = gold.jsonl\n"
      "prompts_dir = ../../prompts\n"
      "published_table = ../table2_published.json\n"
      "out_dir = out\n"
      "workers = 4\n"
      "\n[outlets]\n"
      "FR = outlets_fr.txt\nDE = outlets_de.txt\nES = outlets_es.txt\nUK = outlets_uk.txt\nUS = outlets_us.txt\n"
      "\n[bootstrap]\nresamples = 2000\nseed = 7\nlevel = 0.95\n"
      "\n[annotation]\nbind = 127.0.0.1:8765\ncoder_a = coder_a\ncoder_b = coder_b\nseed_a = 11\nseed_b = 12\n"
      "\n[backend.mock]\nkind = mock_lexicon\nmodel_name = lexicon-v1\n";
  polurl::write_file_if_changed((dir / "config.ini").string(), config);
  std::cout << "wrote " << items.size() << " news items, " << visit_rows.size() << " visit rows to "
            << out_dir << '\n';
  return 0;
}

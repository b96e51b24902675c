#include "tma/i18n.hpp"

#include <algorithm>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <regex>
#include <sstream>

#include "tma/errors.hpp"

namespace tma {

namespace embedded {
const char* english_catalog_text();
const std::vector<std::pair<std::string, std::string>>& english_templates();
}  // namespace embedded

namespace fs = std::filesystem;

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r\n");
  if (b == std::string::npos) return "";
  const auto e = s.find_last_not_of(" \t\r\n");
  return s.substr(b, e - b + 1);
}

std::string read_file(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::string strip_final_newline(std::string s) {
  while (!s.empty() && (s.back() == '\n' || s.back() == '\r')) s.pop_back();
  return s;
}

}  // namespace

Catalog parse_catalog(const std::string& text, const std::string& language, const std::string& source) {
  Catalog c{language, {}, source};
  std::istringstream in(text);
  std::string line;
  int n = 0;
  while (std::getline(in, line)) {
    ++n;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#') continue;
    const auto eq = t.find('=');
    if (eq == std::string::npos) throw FormatError(source + ":" + std::to_string(n) + ": expected key = value");
    const std::string key = trim(t.substr(0, eq));
    if (key.empty() || key.find_first_of(" \t") != std::string::npos) {
      throw FormatError(source + ":" + std::to_string(n) + ": malformed key");
    }
    if (!c.entries.emplace(key, trim(t.substr(eq + 1))).second) {
      throw FormatError(source + ":" + std::to_string(n) + ": duplicate key " + key);
    }
  }
  return c;
}

bool is_language_tag(const std::string& s) {
  static const std::regex tag("[a-z]{2,3}(-[A-Za-z0-9]{2,8})*");
  return std::regex_match(s, tag);
}

const Catalog& english_catalog() {
  static const Catalog c = parse_catalog(embedded::english_catalog_text(), "en", "<bundled>");
  return c;
}

std::string fill(const std::string& pattern, const Slots& slots) {
  std::string out;
  std::size_t i = 0;
  while (i < pattern.size()) {
    if (pattern[i] == '{') {
      const auto close = pattern.find('}', i);
      if (close != std::string::npos) {
        auto it = slots.find(pattern.substr(i + 1, close - i - 1));
        if (it != slots.end()) {
          out += it->second;
          i = close + 1;
          continue;
        }
      }
    }
    out += pattern[i++];
  }
  return out;
}

std::string default_lang_dir() {
  if (const char* env = std::getenv("TMA_LANG_DIR"); env && *env) return env;
  return TMA_DEFAULT_LANG_DIR;
}

I18n::I18n(std::string dir) : dir_(std::move(dir)) { reload(); }

void I18n::reload() {
  catalogs_.clear();
  templates_.clear();
  warnings_.clear();
  catalogs_.emplace("en", english_catalog());
  for (const auto& [id, body] : embedded::english_templates()) templates_["en"][id] = strip_final_newline(body);

  std::error_code ec;
  if (dir_.empty() || !fs::is_directory(dir_, ec)) return;
  std::vector<fs::path> files;
  for (const auto& e : fs::directory_iterator(dir_, ec)) {
    if (e.is_regular_file()) files.push_back(e.path());
  }
  std::sort(files.begin(), files.end());
  const auto& english = english_catalog().entries;
  for (const auto& p : files) {
    const std::string tag = p.filename().string();
    if (!is_language_tag(tag) || tag == "en") continue;
    try {
      Catalog c = parse_catalog(read_file(p), tag, p.string());
      for (auto it = c.entries.begin(); it != c.entries.end();) {
        if (english.count(it->first)) {
          ++it;
        } else {
          warnings_.push_back(p.string() + ": key not in the English catalog: " + it->first);
          it = c.entries.erase(it);
        }
      }
      catalogs_.emplace(tag, std::move(c));
    } catch (const FormatError& e) {
      warnings_.push_back(std::string("skipped catalog ") + e.what());
    }
  }
  const fs::path tdir = fs::path(dir_) / "templates";
  for (const auto& [tag, cat] : catalogs_) {
    if (tag == "en" || !fs::is_directory(tdir / tag, ec)) continue;
    for (const auto& e : fs::directory_iterator(tdir / tag, ec)) {
      if (e.path().extension() != ".tpl") continue;
      templates_[tag][e.path().stem().string()] = strip_final_newline(read_file(e.path()));
    }
  }
}

std::vector<std::string> I18n::available_languages() const {
  std::vector<std::string> out{"en"};
  for (const auto& [tag, c] : catalogs_) {
    if (tag != "en") out.push_back(tag);
  }
  return out;
}

bool I18n::has_language(const std::string& tag) const { return catalogs_.count(tag) > 0; }

std::string I18n::effective_language(const std::string& tag) const {
  auto c = catalogs_.find(tag);
  auto t = templates_.find(tag);
  const bool translated = (c != catalogs_.end() && !c->second.entries.empty()) || (t != templates_.end() && !t->second.empty());
  return translated ? tag : "en";
}

std::string I18n::lookup(const std::string& key, const std::string& language) const {
  if (auto c = catalogs_.find(language); c != catalogs_.end()) {
    if (auto it = c->second.entries.find(key); it != c->second.entries.end()) return it->second;
  }
  const auto& en = english_catalog().entries;
  auto it = en.find(key);
  if (it == en.end()) throw UnknownKey(key);
  return it->second;
}

std::string I18n::text(const std::string& key, const std::string& language, const Slots& slots) const {
  return fill(lookup(key, language), slots);
}

std::vector<std::string> I18n::check_catalog_completeness(const std::string& language) const {
  std::vector<std::string> missing;
  auto c = catalogs_.find(language);
  for (const auto& [key, value] : english_catalog().entries) {
    if (c == catalogs_.end() || !c->second.entries.count(key)) missing.push_back(key);
  }
  if (language == "en") return missing;
  auto t = templates_.find(language);
  for (const auto& id : english_template_ids()) {
    if (t == templates_.end() || !t->second.count(id)) missing.push_back("template:" + id);
  }
  return missing;
}

std::optional<std::string> I18n::template_text(const std::string& id, const std::string& language) const {
  for (const std::string& lang : {language, std::string("en")}) {
    auto t = templates_.find(lang);
    if (t == templates_.end()) continue;
    if (auto it = t->second.find(id); it != t->second.end()) return it->second;
  }
  return std::nullopt;
}

std::vector<std::string> I18n::english_template_ids() const {
  std::vector<std::string> out;
  for (const auto& [id, body] : templates_.at("en")) out.push_back(id);
  return out;
}

}  // namespace tma

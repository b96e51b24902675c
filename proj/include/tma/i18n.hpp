// Language catalogs. Every user-visible string goes through here.
//
// A catalog directory holds one "key = value" file per language, named by its
// language tag ("de", "pt-BR"), and sentence templates for proof steps under
// templates/<tag>/<template-id>.tpl. English is compiled in and is the key universe.
#pragma once

#include <map>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace tma {

class UnknownKey : public std::out_of_range {
 public:
  explicit UnknownKey(const std::string& key) : std::out_of_range("unknown catalog key: " + key), key_(key) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct Catalog {
  std::string language;
  std::map<std::string, std::string> entries;
  std::string source;
};

using Slots = std::map<std::string, std::string>;

/// Throws FormatError on a line that is neither blank, a comment, nor "key = value".
Catalog parse_catalog(const std::string& text, const std::string& language, const std::string& source);
bool is_language_tag(const std::string& s);
const Catalog& english_catalog();

/// Replaces "{name}" by slots[name]; unknown slots stay as written.
std::string fill(const std::string& pattern, const Slots& slots);

/// TMA_LANG_DIR, else the directory shipped with the sources.
std::string default_lang_dir();

class I18n {
 public:
  explicit I18n(std::string dir = default_lang_dir());

  /// Rereads the directory.
  void reload();
  const std::string& directory() const { return dir_; }

  /// "en" first, then the other well-formed catalogs in tag order.
  std::vector<std::string> available_languages() const;
  bool has_language(const std::string& tag) const;
  /// The tag itself when it translates anything, else "en".
  std::string effective_language(const std::string& tag) const;
  /// Problems found while loading (skipped files, foreign keys).
  const std::vector<std::string>& warnings() const { return warnings_; }

  /// The language's entry, else the English one. Throws UnknownKey.
  std::string lookup(const std::string& key, const std::string& language) const;
  std::string text(const std::string& key, const std::string& language, const Slots& slots = {}) const;
  std::vector<std::string> check_catalog_completeness(const std::string& language) const;

  /// The language's template, else the English one; nullopt if neither exists.
  std::optional<std::string> template_text(const std::string& id, const std::string& language) const;
  std::vector<std::string> english_template_ids() const;

 private:
  std::string dir_;
  std::map<std::string, Catalog> catalogs_;
  std::map<std::string, std::map<std::string, std::string>> templates_;
  std::vector<std::string> warnings_;
};

}  // namespace tma

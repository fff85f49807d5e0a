#include <memory>

#include <unicode/normalizer2.h>
#include <unicode/regex.h>
#include <unicode/unistr.h>

#include "trivote/corpus.hpp"
#include "trivote/error.hpp"

namespace trivote {
namespace {

// Rule table, applied in order:
//   1. NFC
//   2. "https?://" or "www." followed by non-space characters -> <URL>
//   3. "@" + word characters, not preceded by a word character -> <USER>
//   4. runs of Unicode whitespace -> " "
//   5. trim
constexpr const char* kUrlRule = "(?:[Hh][Tt][Tt][Pp][Ss]?://|[Ww][Ww][Ww]\\.)\\S+";
constexpr const char* kMentionRule =
    "(?<![\\p{L}\\p{M}\\p{N}_])@[\\p{L}\\p{M}\\p{N}_]+";
constexpr const char* kSpaceRule = "\\s+";

std::unique_ptr<icu::RegexPattern> compile(const char* rule) {
  UErrorCode status = U_ZERO_ERROR;
  UParseError parse_error;
  std::unique_ptr<icu::RegexPattern> p(icu::RegexPattern::compile(
      icu::UnicodeString::fromUTF8(rule), 0, parse_error, status));
  if (U_FAILURE(status)) throw Error(std::string("bad normalization rule: ") + rule);
  return p;
}

icu::UnicodeString replace_all(const icu::RegexPattern& pattern,
                               const icu::UnicodeString& input,
                               const icu::UnicodeString& replacement) {
  UErrorCode status = U_ZERO_ERROR;
  std::unique_ptr<icu::RegexMatcher> m(pattern.matcher(input, status));
  icu::UnicodeString out = m->replaceAll(replacement, status);
  if (U_FAILURE(status)) throw Error("text normalization failed");
  return out;
}

icu::UnicodeString nfc(const icu::UnicodeString& s) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = icu::Normalizer2::getNFCInstance(status);
  icu::UnicodeString out = n->normalize(s, status);
  if (U_FAILURE(status)) throw Error("unicode normalization failed");
  return out;
}

}  // namespace

std::string normalize_text(std::string_view raw) {
  static const auto url = compile(kUrlRule);
  static const auto mention = compile(kMentionRule);
  static const auto space = compile(kSpaceRule);
  static const icu::UnicodeString url_token =
      icu::UnicodeString::fromUTF8(std::string(kUrlPlaceholder));
  static const icu::UnicodeString mention_token =
      icu::UnicodeString::fromUTF8(std::string(kMentionPlaceholder));

  // Ill-formed UTF-8 becomes U+FFFD here.
  icu::UnicodeString s = icu::UnicodeString::fromUTF8(
      icu::StringPiece(raw.data(), static_cast<int32_t>(raw.size())));
  s = nfc(s);
  s = replace_all(*url, s, url_token);
  // Chained mentions ("@a@b") expose the next "@" only after the previous
  // one is replaced, so repeat until stable. Each round removes an "@".
  for (icu::UnicodeString next = replace_all(*mention, s, mention_token); next != s;
       next = replace_all(*mention, s, mention_token)) {
    s = next;
  }
  s = replace_all(*space, s, icu::UnicodeString(u" "));
  // Removing a whitespace run can leave a combining mark at the start of the
  // text; a second NFC pass keeps the output canonical.
  s.trim();
  s = nfc(s);

  std::string out;
  s.toUTF8String(out);
  return out;
}

}  // namespace trivote

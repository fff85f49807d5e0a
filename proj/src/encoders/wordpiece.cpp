#include "trivote/wordpiece.hpp"

#include <fstream>

#include <fmt/format.h>
#include <unicode/locid.h>
#include <unicode/normalizer2.h>
#include <unicode/uchar.h>
#include <unicode/unistr.h>

#include "trivote/error.hpp"

namespace trivote {
namespace {

constexpr std::size_t kMaxCharsPerWord = 100;

bool is_whitespace(UChar32 c) {
  if (c == ' ' || c == '\t' || c == '\n' || c == '\r') return true;
  return u_charType(c) == U_SPACE_SEPARATOR;
}

bool is_control(UChar32 c) {
  if (c == '\t' || c == '\n' || c == '\r') return false;
  const int8_t t = u_charType(c);
  return t == U_CONTROL_CHAR || t == U_FORMAT_CHAR;
}

bool is_punctuation(UChar32 c) {
  if ((c >= 33 && c <= 47) || (c >= 58 && c <= 64) || (c >= 91 && c <= 96) ||
      (c >= 123 && c <= 126)) {
    return true;
  }
  return u_ispunct(c);
}

bool is_cjk(UChar32 c) {
  return (c >= 0x4E00 && c <= 0x9FFF) || (c >= 0x3400 && c <= 0x4DBF) ||
         (c >= 0x20000 && c <= 0x2A6DF) || (c >= 0x2A700 && c <= 0x2B73F) ||
         (c >= 0x2B740 && c <= 0x2B81F) || (c >= 0x2B820 && c <= 0x2CEAF) ||
         (c >= 0xF900 && c <= 0xFAFF) || (c >= 0x2F800 && c <= 0x2FA1F);
}

const icu::Normalizer2& normalizer(bool decompose) {
  UErrorCode status = U_ZERO_ERROR;
  const icu::Normalizer2* n = decompose ? icu::Normalizer2::getNFDInstance(status)
                                        : icu::Normalizer2::getNFCInstance(status);
  if (U_FAILURE(status)) throw Error("ICU normalizer unavailable");
  return *n;
}

std::string to_utf8(const icu::UnicodeString& s) {
  std::string out;
  s.toUTF8String(out);
  return out;
}

}  // namespace

WordPieceTokenizer::WordPieceTokenizer(std::vector<std::string> vocab, bool lower_case)
    : vocab_(std::move(vocab)), lower_case_(lower_case) {
  for (std::size_t i = 0; i < vocab_.size(); ++i) {
    index_.emplace(vocab_[i], static_cast<int>(i));
  }
  cls_ = id("[CLS]");
  sep_ = id("[SEP]");
  unk_ = id("[UNK]");
  if (cls_ < 0 || sep_ < 0 || unk_ < 0) {
    throw ConfigError("vocabulary lacks [CLS], [SEP] or [UNK]");
  }
}

WordPieceTokenizer WordPieceTokenizer::from_file(const std::filesystem::path& vocab_file,
                                                 bool lower_case) {
  std::ifstream in(vocab_file, std::ios::binary);
  if (!in) throw ConfigError(fmt::format("{}: cannot open vocabulary", vocab_file.string()));
  std::vector<std::string> vocab;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    vocab.push_back(line);
  }
  return WordPieceTokenizer(std::move(vocab), lower_case);
}

int WordPieceTokenizer::id(std::string_view token) const {
  auto it = index_.find(std::string(token));
  return it == index_.end() ? -1 : it->second;
}

std::vector<std::string> WordPieceTokenizer::basic_tokenize(std::string_view text) const {
  icu::UnicodeString in = icu::UnicodeString::fromUTF8(
      icu::StringPiece(text.data(), static_cast<int32_t>(text.size())));

  // Clean up, isolate CJK characters.
  icu::UnicodeString cleaned;
  for (int32_t i = 0; i < in.length();) {
    UChar32 c = in.char32At(i);
    i += U16_LENGTH(c);
    if (c == 0 || c == 0xFFFD || is_control(c)) continue;
    if (is_whitespace(c)) {
      cleaned.append(u' ');
    } else if (is_cjk(c)) {
      cleaned.append(u' ').append(c).append(u' ');
    } else {
      cleaned.append(c);
    }
  }
  UErrorCode status = U_ZERO_ERROR;
  cleaned = normalizer(false).normalize(cleaned, status);

  std::vector<std::string> out;
  auto flush_words = [&](const icu::UnicodeString& word) {
    icu::UnicodeString w = word;
    if (lower_case_) {
      w.toLower(icu::Locale::getRoot());
      UErrorCode st = U_ZERO_ERROR;
      icu::UnicodeString nfd = normalizer(true).normalize(w, st);
      w.remove();
      for (int32_t i = 0; i < nfd.length();) {
        UChar32 c = nfd.char32At(i);
        i += U16_LENGTH(c);
        if (u_charType(c) != U_NON_SPACING_MARK) w.append(c);
      }
    }
    icu::UnicodeString piece;
    for (int32_t i = 0; i < w.length();) {
      UChar32 c = w.char32At(i);
      i += U16_LENGTH(c);
      if (is_punctuation(c)) {
        if (!piece.isEmpty()) out.push_back(to_utf8(piece));
        piece.remove();
        out.push_back(to_utf8(icu::UnicodeString(c)));
      } else {
        piece.append(c);
      }
    }
    if (!piece.isEmpty()) out.push_back(to_utf8(piece));
  };

  icu::UnicodeString word;
  for (int32_t i = 0; i < cleaned.length();) {
    UChar32 c = cleaned.char32At(i);
    i += U16_LENGTH(c);
    if (is_whitespace(c)) {
      if (!word.isEmpty()) flush_words(word);
      word.remove();
    } else {
      word.append(c);
    }
  }
  if (!word.isEmpty()) flush_words(word);
  return out;
}

std::vector<std::string> WordPieceTokenizer::tokenize(std::string_view text) const {
  std::vector<std::string> out;
  for (const std::string& word : basic_tokenize(text)) {
    icu::UnicodeString w = icu::UnicodeString::fromUTF8(word);
    // Code point boundaries, as UTF-16 offsets.
    std::vector<int32_t> bounds{0};
    for (int32_t i = 0; i < w.length();) {
      i += U16_LENGTH(w.char32At(i));
      bounds.push_back(i);
    }
    const std::size_t n_chars = bounds.size() - 1;
    if (n_chars > kMaxCharsPerWord) {
      out.push_back(vocab_[unk_]);
      continue;
    }

    std::vector<std::string> pieces;
    bool bad = false;
    std::size_t start = 0;
    while (start < n_chars) {
      std::size_t end = n_chars;
      std::string found;
      while (start < end) {
        std::string sub = to_utf8(w.tempSubStringBetween(bounds[start], bounds[end]));
        if (start > 0) sub = "##" + sub;
        if (index_.count(sub)) {
          found = std::move(sub);
          break;
        }
        --end;
      }
      if (found.empty()) {
        bad = true;
        break;
      }
      pieces.push_back(std::move(found));
      start = end;
    }
    if (bad) {
      out.push_back(vocab_[unk_]);
    } else {
      out.insert(out.end(), pieces.begin(), pieces.end());
    }
  }
  return out;
}

std::vector<int> WordPieceTokenizer::encode(std::string_view text) const {
  std::vector<int> ids;
  for (const std::string& t : tokenize(text)) ids.push_back(index_.at(t));
  return ids;
}

}  // namespace trivote

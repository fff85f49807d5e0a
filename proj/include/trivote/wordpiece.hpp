#ifndef TRIVOTE_WORDPIECE_HPP
#define TRIVOTE_WORDPIECE_HPP

#include <filesystem>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

namespace trivote {

// BERT-style tokenization: text cleanup, CJK isolation, optional lowercasing
// with accent stripping, punctuation splitting, then greedy longest-match
// WordPiece against the vocabulary ("##" marks word continuations).
class WordPieceTokenizer {
 public:
  WordPieceTokenizer(std::vector<std::string> vocab, bool lower_case);

  // One token per line, id = line index.
  static WordPieceTokenizer from_file(const std::filesystem::path& vocab_file,
                                      bool lower_case);

  std::vector<std::string> basic_tokenize(std::string_view text) const;
  std::vector<std::string> tokenize(std::string_view text) const;
  // Ids of tokenize(text), without special tokens.
  std::vector<int> encode(std::string_view text) const;

  int id(std::string_view token) const;  // -1 when absent
  int cls_id() const { return cls_; }
  int sep_id() const { return sep_; }
  int unk_id() const { return unk_; }
  std::size_t vocab_size() const { return vocab_.size(); }

 private:
  std::vector<std::string> vocab_;
  std::unordered_map<std::string, int> index_;
  bool lower_case_;
  int cls_ = -1;
  int sep_ = -1;
  int unk_ = -1;
};

}  // namespace trivote

#endif  // TRIVOTE_WORDPIECE_HPP

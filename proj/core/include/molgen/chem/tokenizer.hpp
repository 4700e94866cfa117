#pragma once

#include <cstddef>
#include <string>
#include <unordered_map>
#include <vector>

#include "molgen/error.hpp"

namespace molgen::chem {

class UnknownTokenError : public Error {
public:
  UnknownTokenError(const std::string& token, std::size_t position)
      : Error("unknown token '" + token + "' at position " + std::to_string(position)),
        position(position) {}
  std::size_t position;
};

class TooLongError : public Error {
public:
  explicit TooLongError(std::size_t count)
      : Error("sequence of " + std::to_string(count) + " tokens exceeds max_len") {}
};

class EmptyCorpusError : public Error {
public:
  EmptyCorpusError() : Error("empty corpus") {}
};

constexpr std::size_t kMaxLen = 120;
constexpr char kPadChar = ' ';

/// Token inventory with dense indices. The pad token (a single space) is
/// always a member and, being lexicographically first among SMILES
/// characters, always sits at index 0.
class Vocabulary {
public:
  explicit Vocabulary(std::vector<std::string> tokens);

  std::size_t size() const { return tokens_.size(); }
  const std::string& token(std::size_t index) const { return tokens_.at(index); }
  const std::vector<std::string>& tokens() const { return tokens_; }

  /// Index of a token, or npos when absent.
  std::size_t find(const std::string& token) const;
  std::size_t pad_index() const { return pad_index_; }

  std::string to_json() const;
  static Vocabulary from_json(const std::string& json_text);

private:
  std::vector<std::string> tokens_;
  std::unordered_map<std::string, std::size_t> index_;
  std::size_t pad_index_;
};

struct TokenSequence {
  std::vector<std::size_t> tokens;  // length == max_len, trailing pad run
  std::size_t max_len = kMaxLen;
};

/// Each row carries exactly one set column; stored as that column index.
struct OneHotMatrix {
  std::size_t rows = 0;
  std::size_t cols = 0;
  std::vector<std::size_t> hot;  // hot[r] = column of the 1 in row r
};

/// Splits a SMILES string into lexical tokens. "Cl" and "Br" are single
/// tokens; every other unit is one character. Lexing does not consult any
/// vocabulary, so an unseen "Cl" reports the position of the 'C'.
std::vector<std::string> lex_smiles(const std::string& smiles);

TokenSequence tokenize(const std::string& smiles, const Vocabulary& vocab,
                       std::size_t max_len = kMaxLen);

/// Inverse of tokenize: concatenates tokens up to the first pad.
std::string detokenize(const TokenSequence& seq, const Vocabulary& vocab);

Vocabulary build_vocabulary(const std::vector<std::string>& corpus);

OneHotMatrix one_hot(const TokenSequence& seq, const Vocabulary& vocab);

}  // namespace molgen::chem

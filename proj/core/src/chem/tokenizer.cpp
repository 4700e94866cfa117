#include "molgen/chem/tokenizer.hpp"

#include <algorithm>
#include <set>

#include "json.hpp"

namespace molgen::chem {

Vocabulary::Vocabulary(std::vector<std::string> tokens) : tokens_(std::move(tokens)) {
  for (std::size_t i = 0; i < tokens_.size(); ++i) {
    if (tokens_[i].empty()) throw Error("vocabulary contains an empty token");
    if (!index_.emplace(tokens_[i], i).second)
      throw Error("vocabulary contains duplicate token '" + tokens_[i] + "'");
  }
  auto it = index_.find(std::string(1, kPadChar));
  if (it == index_.end()) throw Error("vocabulary lacks the pad token");
  pad_index_ = it->second;
}

std::size_t Vocabulary::find(const std::string& token) const {
  auto it = index_.find(token);
  return it == index_.end() ? static_cast<std::size_t>(-1) : it->second;
}

std::string Vocabulary::to_json() const {
  nlohmann::json j = tokens_;
  return j.dump(2) + "\n";
}

Vocabulary Vocabulary::from_json(const std::string& json_text) {
  nlohmann::json j = nlohmann::json::parse(json_text);
  if (!j.is_array()) throw Error("vocabulary file is not a JSON array");
  return Vocabulary(j.get<std::vector<std::string>>());
}

std::vector<std::string> lex_smiles(const std::string& smiles) {
  std::vector<std::string> out;
  for (std::size_t i = 0; i < smiles.size();) {
    char c = smiles[i];
    if (c == 'C' && i + 1 < smiles.size() && smiles[i + 1] == 'l') {
      out.emplace_back("Cl");
      i += 2;
    } else if (c == 'B' && i + 1 < smiles.size() && smiles[i + 1] == 'r') {
      out.emplace_back("Br");
      i += 2;
    } else {
      out.emplace_back(1, c);
      i += 1;
    }
  }
  return out;
}

TokenSequence tokenize(const std::string& smiles, const Vocabulary& vocab,
                       std::size_t max_len) {
  TokenSequence seq;
  seq.max_len = max_len;
  seq.tokens.reserve(max_len);
  std::size_t pos = 0;
  for (const auto& tok : lex_smiles(smiles)) {
    // The pad token is reserved for padding; an interior space is not a
    // SMILES unit even though " " is in the vocabulary.
    std::size_t idx = tok[0] == kPadChar ? static_cast<std::size_t>(-1) : vocab.find(tok);
    if (idx == static_cast<std::size_t>(-1)) throw UnknownTokenError(tok, pos);
    seq.tokens.push_back(idx);
    pos += tok.size();
  }
  if (seq.tokens.size() > max_len) throw TooLongError(seq.tokens.size());
  seq.tokens.resize(max_len, vocab.pad_index());
  return seq;
}

std::string detokenize(const TokenSequence& seq, const Vocabulary& vocab) {
  std::string out;
  for (std::size_t idx : seq.tokens) {
    if (idx == vocab.pad_index()) break;
    out += vocab.token(idx);
  }
  return out;
}

Vocabulary build_vocabulary(const std::vector<std::string>& corpus) {
  if (corpus.empty()) throw EmptyCorpusError();
  std::set<std::string> seen;
  seen.insert(std::string(1, kPadChar));
  for (const auto& smiles : corpus)
    for (auto& tok : lex_smiles(smiles)) seen.insert(std::move(tok));
  // std::set iteration is already lexicographic.
  return Vocabulary(std::vector<std::string>(seen.begin(), seen.end()));
}

OneHotMatrix one_hot(const TokenSequence& seq, const Vocabulary& vocab) {
  OneHotMatrix m;
  m.rows = seq.max_len;
  m.cols = vocab.size();
  m.hot = seq.tokens;
  for (std::size_t idx : m.hot)
    if (idx >= m.cols) throw Error("token index out of vocabulary range");
  return m;
}

}  // namespace molgen::chem

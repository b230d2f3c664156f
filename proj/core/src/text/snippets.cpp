// SPDX-License-Identifier: Apache-2.0
#include "seal/text/snippets.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <set>

#include "json.hpp"
#include "seal/numerics/error.hpp"

namespace seal::text {
namespace {

using json = nlohmann::json;

std::string trim(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && std::isspace(static_cast<unsigned char>(s[b]))) ++b;
  while (e > b && std::isspace(static_cast<unsigned char>(s[e - 1]))) --e;
  return std::string(s.substr(b, e - b));
}

std::set<std::vector<TokenId>> ngram_set(const TokenSeq& seq, std::size_t n) {
  std::set<std::vector<TokenId>> out;
  if (seq.size() < n) return out;
  for (std::size_t i = 0; i + n <= seq.size(); ++i) out.emplace(seq.begin() + i, seq.begin() + i + n);
  return out;
}

}  // namespace

std::vector<std::string> split_sentences(std::string_view text) {
  std::vector<std::string> out;
  std::size_t start = 0;
  auto flush = [&](std::size_t end) {
    std::string s = trim(text.substr(start, end - start));
    if (!s.empty()) out.push_back(std::move(s));
    start = end;
  };
  for (std::size_t i = 0; i < text.size(); ++i) {
    const char c = text[i];
    if (c == '\n') {
      flush(i);
      start = i + 1;
    } else if ((c == '.' || c == '!' || c == '?') && i + 1 < text.size() &&
               std::isspace(static_cast<unsigned char>(text[i + 1]))) {
      flush(i + 1);
    }
  }
  flush(text.size());
  return out;
}

Document make_document(int doc_id, std::string_view text, const Vocab& vocab) {
  Document doc;
  doc.doc_id = doc_id;
  for (const auto& sentence : split_sentences(text)) {
    TokenSeq ids = vocab.encode(sentence);
    if (!ids.empty()) doc.sentences.push_back(std::move(ids));
  }
  return doc;
}

std::vector<Snippet> snippetize(std::span<const Document> docs, std::size_t l_snpt, std::size_t n_snpt) {
  if (l_snpt == 0 || n_snpt == 0) throw ConfigError("snippet length and count must be positive");
  std::vector<Snippet> out;
  for (const Document& doc : docs) {
    Snippet cur;
    cur.doc_id = doc.doc_id;
    auto emit = [&] {
      if (cur.tokens.empty() || out.size() >= n_snpt) return;
      cur.index = out.size();
      out.push_back(cur);
      cur.tokens.clear();
    };
    for (const TokenSeq& sentence : doc.sentences) {
      if (out.size() >= n_snpt) return out;
      const std::size_t len = std::min(sentence.size(), l_snpt);
      if (cur.tokens.size() + len > l_snpt) emit();
      if (out.size() >= n_snpt) return out;
      cur.tokens.insert(cur.tokens.end(), sentence.begin(), sentence.begin() + static_cast<std::ptrdiff_t>(len));
    }
    emit();
    if (out.size() >= n_snpt) return out;
  }
  return out;
}

Article make_article(std::string_view text, const Vocab& vocab) {
  Article article;
  std::size_t start = 0;
  while (start <= text.size()) {
    std::size_t end = text.find("\n\n", start);
    if (end == std::string_view::npos) end = text.size();
    TokenSeq ids = vocab.encode(text.substr(start, end - start));
    if (!ids.empty()) article.sections.push_back(std::move(ids));
    start = end + 2;
  }
  return article;
}

TokenSeq flatten(const Document& doc) {
  TokenSeq out;
  for (const auto& s : doc.sentences) out.insert(out.end(), s.begin(), s.end());
  return out;
}

double clone_score(const TokenSeq& document, const Article& article, std::size_t n) {
  if (n == 0) throw ConfigError("clone_score: n must be >= 1");
  const auto doc_grams = ngram_set(document, n);
  double best = 0.0;
  for (const TokenSeq& section : article.sections) {
    const auto sec_grams = ngram_set(section, n);
    if (sec_grams.empty()) continue;
    std::size_t shared = 0;
    for (const auto& g : sec_grams) shared += doc_grams.contains(g) ? 1 : 0;
    best = std::max(best, static_cast<double>(shared) / static_cast<double>(sec_grams.size()));
  }
  return best;
}

bool is_near_clone(const TokenSeq& document, const Article& article, std::size_t n, double threshold) {
  return clone_score(document, article, n) > threshold;
}

RawExample parse_raw_example(std::string_view line, std::size_t line_no) {
  const std::string where = "corpus line " + std::to_string(line_no);
  json j;
  try {
    j = json::parse(line);
  } catch (const json::exception& e) {
    throw InputError(where + ": malformed JSON (" + e.what() + ")");
  }
  if (!j.is_object()) throw InputError(where + ": expected a JSON object");
  if (!j.contains("documents")) throw InputError(where + ": missing field \"documents\"");
  if (!j.contains("summary")) throw InputError(where + ": missing field \"summary\"");
  if (!j["documents"].is_array()) throw InputError(where + ": \"documents\" must be a list of strings");
  if (!j["summary"].is_string()) throw InputError(where + ": \"summary\" must be a string");
  RawExample raw;
  for (const auto& d : j["documents"]) {
    if (!d.is_string()) throw InputError(where + ": \"documents\" must be a list of strings");
    raw.documents.push_back(d.get<std::string>());
  }
  raw.summary = j["summary"].get<std::string>();
  return raw;
}

std::vector<RawExample> read_corpus(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open corpus " + path.string());
  std::vector<RawExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    out.push_back(parse_raw_example(line, line_no));
  }
  return out;
}

void write_corpus(const std::filesystem::path& path, std::span<const RawExample> examples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write corpus " + path.string());
  for (const auto& ex : examples) {
    json j;
    j["documents"] = ex.documents;
    j["summary"] = ex.summary;
    out << j.dump() << '\n';
  }
}

SnippetizedExample prepare_example(const RawExample& raw, const Vocab& vocab, const SnippetConfig& cfg) {
  if (cfg.l_dec < 1) throw ConfigError("L_dec must be >= 1");
  std::vector<Document> docs;
  docs.reserve(raw.documents.size());
  for (std::size_t i = 0; i < raw.documents.size(); ++i) {
    docs.push_back(make_document(static_cast<int>(i), raw.documents[i], vocab));
  }
  SnippetizedExample ex;
  ex.snippets = snippetize(docs, cfg.l_snpt, cfg.n_snpt);
  ex.num_documents = raw.documents.size();
  ex.target = vocab.encode(raw.summary);
  if (ex.target.size() > cfg.l_dec - 1) ex.target.resize(cfg.l_dec - 1);
  ex.target.push_back(kEos);
  return ex;
}

std::vector<SnippetizedExample> load_examples(const std::filesystem::path& path, const Vocab& vocab,
                                              const SnippetConfig& cfg) {
  std::vector<SnippetizedExample> out;
  for (const auto& raw : read_corpus(path)) out.push_back(prepare_example(raw, vocab, cfg));
  return out;
}

std::string to_json_line(const SnippetizedExample& example) {
  json j;
  j["num_documents"] = example.num_documents;
  json snippets = json::array();
  for (const auto& s : example.snippets) {
    snippets.push_back({{"doc_id", s.doc_id}, {"index", s.index}, {"tokens", s.tokens}});
  }
  j["snippets"] = std::move(snippets);
  j["target"] = example.target;
  return j.dump();
}

SnippetizedExample from_json_line(std::string_view line, std::size_t line_no) {
  const std::string where = "example line " + std::to_string(line_no);
  try {
    const json j = json::parse(line);
    SnippetizedExample ex;
    ex.num_documents = j.at("num_documents").get<std::size_t>();
    for (const auto& s : j.at("snippets")) {
      Snippet snip;
      snip.doc_id = s.at("doc_id").get<int>();
      snip.index = s.at("index").get<std::size_t>();
      snip.tokens = s.at("tokens").get<TokenSeq>();
      ex.snippets.push_back(std::move(snip));
    }
    ex.target = j.at("target").get<TokenSeq>();
    if (ex.target.empty()) throw InputError(where + ": empty target");
    return ex;
  } catch (const json::exception& e) {
    throw InputError(where + ": " + e.what());
  }
}

void write_examples(const std::filesystem::path& path, std::span<const SnippetizedExample> examples) {
  std::ofstream out(path, std::ios::trunc);
  if (!out) throw Error("cannot write " + path.string());
  for (const auto& ex : examples) out << to_json_line(ex) << '\n';
}

std::vector<SnippetizedExample> read_examples(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw InputError("cannot open " + path.string());
  std::vector<SnippetizedExample> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    out.push_back(from_json_line(line, line_no));
  }
  return out;
}

}  // namespace seal::text

// SPDX-License-Identifier: Apache-2.0
#include "seal/training/decode.hpp"

#include <algorithm>
#include <array>
#include <fstream>
#include <map>
#include <sstream>

#include "json.hpp"
#include "seal/numerics/error.hpp"
#include "seal/numerics/ops.hpp"

namespace seal::training {

using models::ModelKind;
using models::Summarizer;

namespace {

TokenId argmax_last_row(const Tensor& logits) {
  const std::size_t v = logits.cols();
  const double* row = logits.data().data() + (logits.rows() - 1) * v;
  return static_cast<TokenId>(std::max_element(row, row + v) - row);
}

std::size_t decode_limit(const Summarizer& model, std::size_t max_len) {
  return std::min(max_len, model.config().l_dec);
}

// Appends memory rows of `add` below `base`.
Tensor append_rows(const Tensor& base, const Tensor& add) {
  if (base.size() == 0) return add;
  std::vector<double> data(base.storage());
  data.insert(data.end(), add.storage().begin(), add.storage().end());
  return Tensor(Shape{base.rows() + add.rows(), base.cols()}, std::move(data));
}

}  // namespace

TokenSeq DecodeTrace::emitted() const {
  TokenSeq out;
  for (const auto& s : segments) out.insert(out.end(), s.tokens.begin(), s.tokens.end());
  return out;
}

TokenSeq greedy_decode(const Summarizer& model, const text::SnippetizedExample& example, std::size_t max_len) {
  if (model.config().kind == ModelKind::SEAL) return greedy_decode_segmentwise(model, example, max_len).tokens;
  const std::size_t limit = decode_limit(model, max_len);
  Tape encode_tape(false);
  const Tensor memory = model.build_memory(encode_tape, example).rows.value();
  TokenSeq inputs{text::kBos};
  TokenSeq out;
  const nn::ForwardContext ctx;
  while (out.size() < limit) {
    Tape tape(false);
    const Var logits = model.decode(tape, inputs, tape.constant(memory), nullptr, ctx);
    const TokenId next = argmax_last_row(logits.value());
    if (next == text::kEos) break;
    out.push_back(next);
    inputs.push_back(next);
  }
  return out;
}

DecodeResult greedy_decode_segmentwise(const Summarizer& model, const text::SnippetizedExample& example,
                                       std::size_t max_len) {
  const auto& cfg = model.config();
  if (cfg.kind != ModelKind::SEAL && cfg.kind != ModelKind::EA) {
    throw ConfigError("segment-wise decoding needs an EA or SEAL model, got " + models::to_string(cfg.kind));
  }
  const std::size_t limit = decode_limit(model, max_len);
  // EA never re-selects: its only segment spans the whole decode.
  const std::size_t l_seg = cfg.kind == ModelKind::SEAL ? cfg.l_seg : cfg.l_dec;
  const nn::ForwardContext ctx;

  Tape encode_tape(false);
  const models::EncodedSnippets encoded = model.encode_snippets(encode_tape, example, ctx);
  const Var pooled = model.pool_snippets(encode_tape, encoded);
  const Var stacked = model.stack_snippets(encode_tape, encoded);

  DecodeResult result;
  Tensor memory;
  std::vector<std::size_t> block_begin;
  std::vector<TokenSeq> generated_segments;
  TokenSeq inputs{text::kBos};
  bool finished = false;
  for (std::size_t tau = 0; tau < limit && !finished; ++tau) {
    if (tau % l_seg == 0) {
      // Segment boundary: score with the model's own segments so far.
      Tape tape(false);
      std::optional<Var> prev;
      std::vector<TokenSeq> nonempty;
      for (const auto& s : generated_segments) {
        if (!s.empty()) nonempty.push_back(s);
      }
      if (!nonempty.empty()) prev = model.pool_segments(tape, nonempty, ctx);
      const auto scorer = model.run_scorer(tape, tape.constant(pooled.value()), prev, ctx);
      SegmentTrace seg;
      seg.segment = tau / l_seg;
      seg.start = tau;
      seg.scores = scorer.values();
      const auto selection = models::gate_select(seg.scores, encoded.lengths, cfg.l_ext);
      seg.selected = selection.selected;
      const Var rows = model.apply_selection(tape, tape.constant(stacked.value()), encoded, selection);
      block_begin.push_back(memory.size() == 0 ? 0 : memory.rows());
      memory = append_rows(memory, rows.value());
      result.trace.segments.push_back(std::move(seg));
      generated_segments.emplace_back();
    }
    Tape tape(false);
    Var logits;
    if (block_begin.size() == 1) {
      logits = model.decode(tape, inputs, tape.constant(memory), nullptr, ctx);
    } else {
      Tensor mask(Shape{inputs.size(), memory.rows()});
      for (std::size_t t = 0; t < inputs.size(); ++t) {
        const std::size_t j = t / l_seg;
        const std::size_t end = j + 1 < block_begin.size() ? block_begin[j + 1] : memory.rows();
        for (std::size_t r = block_begin[j]; r < end; ++r) mask.at(t, r) = 1.0;
      }
      logits = model.decode(tape, inputs, tape.constant(memory), &mask, ctx);
    }
    const TokenId next = argmax_last_row(logits.value());
    if (next == text::kEos) {
      finished = true;
      break;
    }
    result.tokens.push_back(next);
    result.trace.segments.back().tokens.push_back(next);
    generated_segments.back().push_back(next);
    inputs.push_back(next);
  }
  return result;
}

std::string trace_to_json(const DecodeTrace& trace, const text::SnippetizedExample& example,
                          const text::Vocab& vocab) {
  nlohmann::ordered_json j;
  j["example_id"] = trace.example_id;
  j["summary"] = vocab.decode(trace.emitted(), true);
  auto& segs = j["segments"] = nlohmann::ordered_json::array();
  for (const auto& s : trace.segments) {
    nlohmann::ordered_json js;
    js["segment"] = s.segment;
    js["start"] = s.start;
    js["scores"] = s.scores;
    js["selected"] = s.selected;
    js["tokens"] = s.tokens;
    js["text"] = vocab.decode(s.tokens, true);
    segs.push_back(std::move(js));
  }
  auto& snippets = j["snippets"] = nlohmann::ordered_json::array();
  for (const auto& s : example.snippets) {
    snippets.push_back({{"index", s.index}, {"doc_id", s.doc_id}, {"text", vocab.decode(s.tokens, true)}});
  }
  return j.dump(2);
}

DecodeTrace trace_from_json(const std::string& json) {
  DecodeTrace trace;
  try {
    const auto j = nlohmann::json::parse(json);
    trace.example_id = j.at("example_id").get<std::string>();
    for (const auto& js : j.at("segments")) {
      SegmentTrace s;
      s.segment = js.at("segment").get<std::size_t>();
      s.start = js.at("start").get<std::size_t>();
      s.scores = js.at("scores").get<std::vector<double>>();
      s.selected = js.at("selected").get<std::vector<std::size_t>>();
      s.tokens = js.at("tokens").get<TokenSeq>();
      trace.segments.push_back(std::move(s));
    }
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed trace: ") + e.what());
  }
  return trace;
}

namespace {

constexpr std::array<const char*, 8> kPalette = {"#fbb4ae", "#b3cde3", "#ccebc5", "#decbe4",
                                                 "#fed9a6", "#ffffcc", "#e5d8bd", "#fddaec"};

std::string escape_html(const std::string& s) {
  std::string out;
  for (char c : s) {
    switch (c) {
      case '<':
        out += "&lt;";
        break;
      case '>':
        out += "&gt;";
        break;
      case '&':
        out += "&amp;";
        break;
      case '"':
        out += "&quot;";
        break;
      default:
        out += c;
    }
  }
  return out;
}

}  // namespace

namespace {

std::string render_html(const DecodeTrace& trace, const std::vector<std::string>& segment_texts,
                        const std::vector<std::string>& snippet_texts) {
  // A snippet selected by several segments keeps the color of the first one.
  std::map<std::size_t, std::size_t> first_segment;
  std::map<std::size_t, std::vector<std::size_t>> selected_by;
  for (const auto& s : trace.segments) {
    for (std::size_t idx : s.selected) {
      if (idx >= snippet_texts.size()) {
        throw InputError("trace selects snippet " + std::to_string(idx) + " but the example has " +
                         std::to_string(snippet_texts.size()));
      }
      first_segment.emplace(idx, s.segment);
      selected_by[idx].push_back(s.segment);
    }
  }
  std::ostringstream html;
  html << "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\"><title>trace "
       << escape_html(trace.example_id) << "</title>\n"
       << "<style>body{font-family:sans-serif;max-width:60em;margin:2em auto}"
          "span.seg,div.snippet{padding:2px 4px;border-radius:3px}"
          "div.snippet{margin:4px 0}b.sid{font-family:monospace}</style></head><body>\n";
  html << "<h2>Summary</h2>\n<p class=\"summary\">\n";
  for (std::size_t k = 0; k < trace.segments.size(); ++k) {
    const auto& s = trace.segments[k];
    html << "<span class=\"seg\" data-segment=\"" << s.segment << "\" style=\"background:"
         << kPalette[s.segment % kPalette.size()] << "\"><b class=\"sid\">[" << s.segment << "]</b> "
         << escape_html(segment_texts[k]) << "</span>\n";
  }
  html << "</p>\n<h2>Selections</h2>\n<ul class=\"selections\">\n";
  for (const auto& s : trace.segments) {
    html << "<li data-segment=\"" << s.segment << "\">segment " << s.segment << ": snippets";
    for (std::size_t idx : s.selected) html << " <span class=\"sel\" data-snippet=\"" << idx << "\">" << idx << "</span>";
    html << "</li>\n";
  }
  html << "</ul>\n<h2>Input snippets</h2>\n";
  for (std::size_t i = 0; i < snippet_texts.size(); ++i) {
    const auto it = first_segment.find(i);
    html << "<div class=\"snippet\" data-snippet=\"" << i << "\"";
    if (it != first_segment.end()) {
      html << " data-first-segment=\"" << it->second << "\" style=\"background:"
           << kPalette[it->second % kPalette.size()] << "\"";
    }
    html << "><b class=\"sid\">";
    if (it != first_segment.end()) {
      html << "[";
      const auto& segs = selected_by[i];
      for (std::size_t k = 0; k < segs.size(); ++k) html << (k ? "," : "") << segs[k];
      html << "] ";
    }
    html << "#" << i << "</b> " << escape_html(snippet_texts[i]) << "</div>\n";
  }
  html << "</body></html>\n";
  return html.str();
}

}  // namespace

std::string trace_to_html(const DecodeTrace& trace, const text::SnippetizedExample& example,
                          const text::Vocab& vocab) {
  std::vector<std::string> segments;
  for (const auto& s : trace.segments) segments.push_back(vocab.decode(s.tokens, true));
  std::vector<std::string> snippets;
  for (const auto& s : example.snippets) snippets.push_back(vocab.decode(s.tokens, true));
  return render_html(trace, segments, snippets);
}

std::string trace_json_to_html(const std::string& json) {
  const DecodeTrace trace = trace_from_json(json);
  std::vector<std::string> segments;
  std::vector<std::string> snippets;
  try {
    const auto j = nlohmann::json::parse(json);
    for (const auto& s : j.at("segments")) segments.push_back(s.at("text").get<std::string>());
    for (const auto& s : j.at("snippets")) snippets.push_back(s.at("text").get<std::string>());
  } catch (const nlohmann::json::exception& e) {
    throw InputError(std::string("malformed trace: ") + e.what());
  }
  return render_html(trace, segments, snippets);
}

void export_trace(const DecodeTrace& trace, const text::SnippetizedExample& example, const text::Vocab& vocab,
                  TraceFormat format, const std::filesystem::path& path) {
  std::ofstream out(path);
  if (!out) throw InputError("cannot write trace to " + path.string());
  out << (format == TraceFormat::Json ? trace_to_json(trace, example, vocab) : trace_to_html(trace, example, vocab));
  if (!out) throw InputError("failed writing trace to " + path.string());
}

}  // namespace seal::training

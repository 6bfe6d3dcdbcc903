#include "svrgol/data.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <stdexcept>

#include "svrgol/errors.hpp"

namespace svrgol {
namespace {

std::string_view strip_comment(std::string_view line) {
  const std::size_t hash = line.find('#');
  return hash == std::string_view::npos ? line : line.substr(0, hash);
}

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\r' || c == '\n'; }

// Splits on runs of whitespace.
std::vector<std::string_view> tokenize(std::string_view text) {
  std::vector<std::string_view> out;
  std::size_t i = 0;
  while (i < text.size()) {
    while (i < text.size() && is_space(text[i])) ++i;
    std::size_t j = i;
    while (j < text.size() && !is_space(text[j])) ++j;
    if (j > i) out.push_back(text.substr(i, j - i));
    i = j;
  }
  return out;
}

double parse_double(std::string_view tok, std::string_view what) {
  double value = 0.0;
  const auto [ptr, ec] =
      std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError("bad " + std::string(what) + " '" + std::string(tok) + "'");
  return value;
}

std::uint64_t parse_index(std::string_view tok) {
  std::uint64_t value = 0;
  const auto [ptr, ec] =
      std::from_chars(tok.data(), tok.data() + tok.size(), value);
  if (ec != std::errc{} || ptr != tok.data() + tok.size())
    throw ParseError("bad feature index '" + std::string(tok) + "'");
  return value;
}

int parse_label(std::string_view tok) {
  // "+..." is rejected by from_chars; accept the explicit plus form here.
  std::string_view body = tok;
  if (!body.empty() && body.front() == '+') body.remove_prefix(1);
  const double v = parse_double(body, "label");
  if (v == 1.0) return +1;
  if (v == 0.0 || v == -1.0) return -1;  // public files use both conventions
  throw ParseError("bad label '" + std::string(tok) + "'");
}

Example parse_line_impl(std::string_view line, std::uint32_t dim,
                        int hash_bits) {
  const std::vector<std::string_view> tokens = tokenize(strip_comment(line));
  if (tokens.empty())
    throw ParseError("missing label in line '" + std::string(line) + "'");

  Example out;
  out.label = parse_label(tokens[0]);

  std::vector<SparseEntry> raw;
  raw.reserve(tokens.size() - 1);
  for (std::size_t i = 1; i < tokens.size(); ++i) {
    const std::string_view tok = tokens[i];
    const std::size_t colon = tok.find(':');
    if (colon == std::string_view::npos || colon == 0 ||
        colon + 1 == tok.size())
      throw ParseError("malformed feature token '" + std::string(tok) + "'");
    const std::uint64_t raw_index = parse_index(tok.substr(0, colon));
    const double value = parse_double(tok.substr(colon + 1), "feature value");
    std::uint32_t index;
    if (hash_bits > 0) {
      index = hash_feature(raw_index, hash_bits);
    } else {
      if (raw_index >= dim)
        throw ParseError("feature index " + std::to_string(raw_index) +
                         " out of range for dim " + std::to_string(dim));
      index = static_cast<std::uint32_t>(raw_index);
    }
    raw.push_back({index, value});
  }
  out.features = SparseVector(dim, std::move(raw));
  return out;
}

double sigmoid(double z) {
  if (z >= 0.0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

}  // namespace

std::uint32_t hash_feature(std::uint64_t raw_index, int hash_bits) {
  if (hash_bits < 1 || hash_bits > 31)
    throw std::invalid_argument("hash_bits must be in [1, 31]");
  const std::uint32_t mask = (1u << hash_bits) - 1u;
  return static_cast<std::uint32_t>(mix64(raw_index)) & mask;
}

Example parse_libsvm_line(std::string_view line, int hash_bits) {
  if (hash_bits < 1 || hash_bits > 31)
    throw std::invalid_argument("hash_bits must be in [1, 31]");
  return parse_line_impl(line, 1u << hash_bits, hash_bits);
}

Example parse_canonical_line(std::string_view line, std::uint32_t dim) {
  return parse_line_impl(line, dim, 0);
}

std::string to_libsvm(const Example& e) {
  std::string out = e.label > 0 ? "+1" : "-1";
  char buf[64];
  for (const SparseEntry& entry : e.features.entries()) {
    out += ' ';
    out += std::to_string(entry.index);
    out += ':';
    const auto res = std::to_chars(buf, buf + sizeof(buf), entry.value,
                                   std::chars_format::general, 17);
    out.append(buf, res.ptr);
  }
  return out;
}

Dataset load_libsvm(const std::string& path, int hash_bits) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path + "'");
  Dataset out;
  out.dim = 1u << hash_bits;
  std::string line;
  std::size_t lineno = 0;
  while (std::getline(in, line)) {
    ++lineno;
    if (tokenize(strip_comment(line)).empty()) continue;
    try {
      out.examples.push_back(parse_libsvm_line(line, hash_bits));
    } catch (const ParseError& e) {
      throw ParseError(path + ":" + std::to_string(lineno) + ": " + e.what());
    }
  }
  return out;
}

StreamSampler::StreamSampler(const Dataset& dataset, std::uint64_t seed)
    : dataset_(&dataset), rng_(seed) {}

const Example& StreamSampler::next() {
  if (dataset_->empty())
    throw std::logic_error("StreamSampler: dataset is empty");
  const std::uint64_t i = uniform_index(rng_, dataset_->size());
  ++samples_drawn_;
  return dataset_->examples[i];
}

Dataset gen_synthetic(std::uint32_t dim, std::size_t n, std::uint32_t sparsity,
                      const DenseVector& w_true, std::uint64_t seed) {
  if (dim < 1 || n < 1 || sparsity < 1 || sparsity > dim)
    throw std::invalid_argument("gen_synthetic: invalid sizes");
  if (w_true.dim() != dim)
    throw std::invalid_argument("gen_synthetic: w_true dimension mismatch");

  Rng rng(seed);
  Dataset out;
  out.dim = dim;
  out.examples.reserve(n);

  std::vector<std::uint32_t> picked;
  picked.reserve(sparsity);
  std::vector<std::uint32_t> pool;

  for (std::size_t e = 0; e < n; ++e) {
    picked.clear();
    if (sparsity * 2 >= dim) {
      // Dense-ish support: partial Fisher-Yates over the full index pool.
      pool.resize(dim);
      for (std::uint32_t i = 0; i < dim; ++i) pool[i] = i;
      for (std::uint32_t i = 0; i < sparsity; ++i) {
        const std::uint64_t j = i + uniform_index(rng, dim - i);
        std::swap(pool[i], pool[j]);
        picked.push_back(pool[i]);
      }
    } else {
      while (picked.size() < sparsity) {
        const auto idx = static_cast<std::uint32_t>(uniform_index(rng, dim));
        if (std::find(picked.begin(), picked.end(), idx) == picked.end())
          picked.push_back(idx);
      }
    }
    std::sort(picked.begin(), picked.end());

    std::vector<SparseEntry> entries;
    entries.reserve(sparsity);
    for (const std::uint32_t idx : picked)
      entries.push_back({idx, gaussian(rng)});
    SparseVector features = SparseVector::from_sorted(dim, std::move(entries));

    const double p = sigmoid(dot(features, w_true));
    const int label = uniform_unit(rng) < p ? +1 : -1;
    out.examples.push_back({std::move(features), label});
  }
  return out;
}

}  // namespace svrgol

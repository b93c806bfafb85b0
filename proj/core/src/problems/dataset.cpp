#include "newtonmr/problems/dataset.hpp"

#include <algorithm>
#include <cerrno>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <map>
#include <sstream>

namespace newtonmr {

Index Dataset::n() const {
  return std::visit([](const auto& m) -> Index { return m.rows(); }, features);
}

Index Dataset::p() const {
  return std::visit([](const auto& m) -> Index { return m.cols(); }, features);
}

Matrix Dataset::times(const Matrix& w) const {
  return std::visit([&](const auto& m) -> Matrix { return m * w; }, features);
}

Matrix Dataset::transpose_times(const Matrix& m) const {
  return std::visit([&](const auto& a) -> Matrix { return a.transpose() * m; }, features);
}

Matrix Dataset::dense_features() const {
  return std::visit([](const auto& m) -> Matrix { return Matrix(m); }, features);
}

void Dataset::validate() const {
  if (num_classes < 1) throw std::invalid_argument("dataset: need at least one class");
  if (static_cast<Index>(labels.size()) != n()) throw std::invalid_argument("dataset: label count differs from rows");
  for (int b : labels) {
    if (b < 0 || b >= num_classes) throw std::invalid_argument("dataset: label out of range");
  }
  if (!label_values.empty() && static_cast<int>(label_values.size()) != num_classes) {
    throw std::invalid_argument("dataset: label_values size differs from num_classes");
  }
}

Dataset make_dataset(Matrix features, std::vector<int> labels, int num_classes) {
  Dataset d;
  d.features = std::move(features);
  d.labels = std::move(labels);
  d.num_classes = num_classes;
  for (int c = 0; c < num_classes; ++c) d.label_values.push_back(c);
  d.validate();
  return d;
}

ParseError::ParseError(const std::string& what, std::size_t line, std::size_t column)
    : std::runtime_error("line " + std::to_string(line) + ", column " + std::to_string(column) + ": " + what),
      line_(line),
      column_(column) {}

namespace {

struct Entry {
  Index row;
  Index col;
  double value;
};

// strtod accepts forms like "inf" and hex floats; the grammar is plain
// decimal, so reject anything non-finite.
bool parse_double(std::string_view tok, double& out) {
  std::string buf(tok);
  char* end = nullptr;
  errno = 0;
  out = std::strtod(buf.c_str(), &end);
  return end == buf.c_str() + buf.size() && !buf.empty() && errno != ERANGE && std::isfinite(out);
}

}  // namespace

Dataset parse_libsvm(const std::string& text, const LibsvmOptions& opts) {
  std::vector<double> raw_labels;
  std::vector<Entry> entries;
  Index max_index = 0;

  std::istringstream in(text);
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    std::size_t pos = line.find_first_not_of(" \t");
    if (pos == std::string::npos || line[pos] == '#') continue;

    auto next_token = [&](std::size_t& start) -> std::string_view {
      start = line.find_first_not_of(" \t", pos);
      if (start == std::string::npos) {
        pos = line.size();
        return {};
      }
      std::size_t end = line.find_first_of(" \t", start);
      if (end == std::string::npos) end = line.size();
      pos = end;
      return std::string_view(line).substr(start, end - start);
    };

    std::size_t col = 0;
    std::string_view tok = next_token(col);
    double label = 0.0;
    if (!parse_double(tok, label)) throw ParseError("invalid label '" + std::string(tok) + "'", line_no, col + 1);
    const Index row = static_cast<Index>(raw_labels.size());
    raw_labels.push_back(label);

    Index last = 0;
    while (true) {
      tok = next_token(col);
      if (tok.empty()) break;
      if (tok[0] == '#') break;
      const std::size_t colon = tok.find(':');
      if (colon == std::string_view::npos) throw ParseError("expected idx:value", line_no, col + 1);
      long long idx = 0;
      const auto idx_tok = tok.substr(0, colon);
      const auto [ptr, ec] = std::from_chars(idx_tok.data(), idx_tok.data() + idx_tok.size(), idx);
      if (ec != std::errc() || ptr != idx_tok.data() + idx_tok.size()) {
        throw ParseError("invalid feature index '" + std::string(idx_tok) + "'", line_no, col + 1);
      }
      if (idx < 1) throw ParseError("feature index must be >= 1", line_no, col + 1);
      if (idx <= last) throw ParseError("feature indices must increase", line_no, col + 1);
      if (opts.num_features && idx > *opts.num_features) {
        throw ParseError("feature index exceeds the declared dimension", line_no, col + 1);
      }
      double value = 0.0;
      if (!parse_double(tok.substr(colon + 1), value)) {
        throw ParseError("invalid feature value", line_no, col + colon + 2);
      }
      last = static_cast<Index>(idx);
      max_index = std::max(max_index, last);
      if (value != 0.0) entries.push_back({row, last - 1, value});
    }
  }

  Dataset data;
  if (opts.label_values) {
    data.label_values = *opts.label_values;
  } else {
    data.label_values = raw_labels;
    std::sort(data.label_values.begin(), data.label_values.end());
    data.label_values.erase(std::unique(data.label_values.begin(), data.label_values.end()), data.label_values.end());
  }
  data.num_classes = static_cast<int>(data.label_values.size());
  std::map<double, int> class_of;
  for (int c = 0; c < data.num_classes; ++c) class_of[data.label_values[c]] = c;
  data.labels.reserve(raw_labels.size());
  for (std::size_t i = 0; i < raw_labels.size(); ++i) {
    auto it = class_of.find(raw_labels[i]);
    if (it == class_of.end()) throw std::invalid_argument("libsvm: label not in the given label set");
    data.labels.push_back(it->second);
  }

  const Index n = static_cast<Index>(raw_labels.size());
  const Index p = opts.num_features.value_or(max_index);
  if (p < opts.dense_below) {
    Matrix x = Matrix::Zero(n, p);
    for (const auto& e : entries) x(e.row, e.col) = e.value;
    data.features = std::move(x);
  } else {
    std::vector<Eigen::Triplet<double>> trip;
    trip.reserve(entries.size());
    for (const auto& e : entries) trip.emplace_back(e.row, e.col, e.value);
    SparseMatrix x(n, p);
    x.setFromTriplets(trip.begin(), trip.end());
    x.makeCompressed();
    data.features = std::move(x);
  }
  data.validate();
  return data;
}

Dataset read_libsvm(const std::string& path, const LibsvmOptions& opts) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse_libsvm(buf.str(), opts);
}

std::string format_libsvm(const Dataset& data) {
  data.validate();
  std::string out;
  char buf[64];
  auto put = [&](const char* fmt, auto... args) {
    std::snprintf(buf, sizeof buf, fmt, args...);
    out += buf;
  };
  auto label_of = [&](Index i) {
    const int c = data.labels[static_cast<std::size_t>(i)];
    return data.label_values.empty() ? static_cast<double>(c) : data.label_values[static_cast<std::size_t>(c)];
  };
  if (const auto* dense = std::get_if<Matrix>(&data.features)) {
    for (Index i = 0; i < dense->rows(); ++i) {
      put("%.17g", label_of(i));
      for (Index j = 0; j < dense->cols(); ++j) {
        if ((*dense)(i, j) != 0.0) put(" %lld:%.17g", static_cast<long long>(j + 1), (*dense)(i, j));
      }
      out += '\n';
    }
  } else {
    const auto& sparse = std::get<SparseMatrix>(data.features);
    for (Index i = 0; i < sparse.outerSize(); ++i) {
      put("%.17g", label_of(i));
      for (SparseMatrix::InnerIterator it(sparse, i); it; ++it) {
        if (it.value() != 0.0) put(" %lld:%.17g", static_cast<long long>(it.col() + 1), it.value());
      }
      out += '\n';
    }
  }
  return out;
}

void write_libsvm(const std::string& path, const Dataset& data) {
  std::ofstream out(path);
  if (!out) throw std::runtime_error("cannot write " + path);
  out << format_libsvm(data);
  if (!out) throw std::runtime_error("write failed: " + path);
}

}  // namespace newtonmr

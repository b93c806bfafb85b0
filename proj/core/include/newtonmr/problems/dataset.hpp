#pragma once

#include <Eigen/SparseCore>
#include <cstddef>
#include <optional>
#include <stdexcept>
#include <string>
#include <variant>
#include <vector>

#include "newtonmr/types.hpp"

namespace newtonmr {

using SparseMatrix = Eigen::SparseMatrix<double, Eigen::RowMajor>;

/// Labelled classification data. Features are n x p, either dense or sparse
/// (compressed rows). Labels are class ids in [0, num_classes).
struct Dataset {
  std::variant<Matrix, SparseMatrix> features;
  std::vector<int> labels;
  int num_classes = 0;
  /// Original label values, indexed by class id (as read from file).
  std::vector<double> label_values;

  Index n() const;
  Index p() const;
  bool is_sparse() const { return std::holds_alternative<SparseMatrix>(features); }

  /// features * w (n x k) for a p x k matrix w.
  Matrix times(const Matrix& w) const;
  /// features^T * m (p x k) for an n x k matrix m.
  Matrix transpose_times(const Matrix& m) const;
  Matrix dense_features() const;

  /// Throws std::invalid_argument on inconsistent sizes or labels.
  void validate() const;
};

Dataset make_dataset(Matrix features, std::vector<int> labels, int num_classes);

class ParseError : public std::runtime_error {
public:
  ParseError(const std::string& what, std::size_t line, std::size_t column);
  std::size_t line() const { return line_; }
  std::size_t column() const { return column_; }

private:
  std::size_t line_;
  std::size_t column_;
};

struct LibsvmOptions {
  /// Feature count; inferred from the largest index when absent.
  std::optional<Index> num_features;
  /// Label values defining the class ids (e.g. those of a training set).
  /// When absent, the sorted distinct labels of the file are used.
  std::optional<std::vector<double>> label_values;
  /// Rows are stored dense when p is below this, sparse otherwise.
  Index dense_below = 100;
};

/// Reads "label idx:val idx:val ..." lines with 1-based, increasing
/// indices. Blank lines and lines starting with '#' are skipped.
Dataset read_libsvm(const std::string& path, const LibsvmOptions& opts = {});
Dataset parse_libsvm(const std::string& text, const LibsvmOptions& opts = {});

/// Writes nonzero entries with round-trip precision.
void write_libsvm(const std::string& path, const Dataset& data);
std::string format_libsvm(const Dataset& data);

}  // namespace newtonmr

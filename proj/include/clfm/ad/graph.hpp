#pragma once

// Dense reverse-mode automatic differentiation over 2-D double matrices.
//
// Every value in the graph is an Eigen::MatrixXd (rows x cols, column-major
// storage inside Eigen). Batches run along rows, features along columns.
// A `Var` is a cheap, shared handle to a graph node; ops build new nodes and
// record a backward closure only when at least one input requires gradients.

#include <Eigen/Dense>

#include <functional>
#include <memory>
#include <stdexcept>
#include <string>
#include <vector>

namespace clfm::ad {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;
using RowVector = Eigen::RowVectorXd;

/// Thrown when operand shapes do not conform for an op.
class ShapeError : public std::invalid_argument {
 public:
  ShapeError(const std::string& op, const std::string& detail);
};

struct Node {
  Matrix value;
  Matrix grad;  // empty until something accumulates into it
  bool requires_grad = false;
  const char* op = "leaf";
  std::vector<std::shared_ptr<Node>> parents;
  std::function<void(Node&)> backward_fn;

  void accumulate(const Matrix& g);
};

class Var {
 public:
  Var() = default;
  explicit Var(Matrix value, bool requires_grad = false);

  static Var constant(Matrix value) { return Var(std::move(value), false); }
  static Var parameter(Matrix value) { return Var(std::move(value), true); }
  static Var scalar(double v, bool requires_grad = false);

  bool defined() const { return static_cast<bool>(node_); }
  const Matrix& value() const { return node_->value; }
  /// Mutable access for optimizers and test harnesses; only sensible on leaves.
  Matrix& mutable_value() { return node_->value; }
  /// Gradient accumulated so far; a zero matrix of the value's shape if none.
  Matrix grad() const;
  bool requires_grad() const { return node_ && node_->requires_grad; }
  Eigen::Index rows() const { return node_->value.rows(); }
  Eigen::Index cols() const { return node_->value.cols(); }
  Eigen::Index size() const { return node_->value.size(); }
  const char* op() const { return node_->op; }
  double item() const;

  void zero_grad();
  /// Reverse sweep from this 1x1 node; accumulates into every reachable leaf.
  void backward() const;

  const std::shared_ptr<Node>& node() const { return node_; }

  // Used by op implementations.
  static Var make(Matrix value, const char* op, std::vector<Var> inputs,
                  std::function<void(Node&)> backward_fn);

 private:
  explicit Var(std::shared_ptr<Node> node) : node_(std::move(node)) {}
  std::shared_ptr<Node> node_;
};

// ---- elementwise, broadcasting ----------------------------------------------
// Broadcasting follows the usual rule per axis: sizes equal, or one of them 1.

Var add(const Var& a, const Var& b);
Var sub(const Var& a, const Var& b);
Var mul(const Var& a, const Var& b);
Var div(const Var& a, const Var& b);
Var neg(const Var& a);
Var scale(const Var& a, double c);
Var add_scalar(const Var& a, double c);

inline Var operator+(const Var& a, const Var& b) { return add(a, b); }
inline Var operator-(const Var& a, const Var& b) { return sub(a, b); }
inline Var operator-(const Var& a) { return neg(a); }
inline Var operator*(double c, const Var& a) { return scale(a, c); }
inline Var operator*(const Var& a, double c) { return scale(a, c); }
inline Var operator+(const Var& a, double c) { return add_scalar(a, c); }
inline Var operator-(const Var& a, double c) { return add_scalar(a, -c); }

// ---- unary ------------------------------------------------------------------

Var square(const Var& a);
Var sqrt(const Var& a);
Var exp(const Var& a);
Var log(const Var& a);
Var tanh(const Var& a);
Var sigmoid(const Var& a);
/// tanh approximation: 0.5 x (1 + tanh(sqrt(2/pi) (x + 0.044715 x^3))).
Var gelu(const Var& a);
/// x * sigmoid(x).
Var silu(const Var& a);
/// Clamp to [lo, hi]; gradient is zero where the clamp is active.
Var clamp(const Var& a, double lo, double hi);

// ---- linear algebra and reductions --------------------------------------------

Var matmul(const Var& a, const Var& b);
Var transpose(const Var& a);
Var sum(const Var& a);
Var mean(const Var& a);
/// Reduce over rows: (r x c) -> (1 x c).
Var sum_rows(const Var& a);
Var mean_rows(const Var& a);
/// Reduce over columns: (r x c) -> (r x 1).
Var sum_cols(const Var& a);
Var mean_cols(const Var& a);
/// sum(a .* b) over all entries.
Var dot(const Var& a, const Var& b);

// ---- structure ---------------------------------------------------------------

Var concat_cols(const std::vector<Var>& parts);
Var concat_rows(const std::vector<Var>& parts);
Var slice_cols(const Var& a, Eigen::Index start, Eigen::Index count);
Var slice_rows(const Var& a, Eigen::Index start, Eigen::Index count);
/// Rows picked by index (repeats allowed); backward scatters.
Var gather_rows(const Var& a, const std::vector<Eigen::Index>& rows);

/// Row-wise layer normalization with learned gain (1 x c) and shift (1 x c).
Var layer_norm(const Var& x, const Var& gain, const Var& shift, double eps = 1e-5);

/// Real DFT of each row (length must be a power of two).
/// Output is [Re(X_0..X_{L/2}) | Im(X_0..X_{L/2})], i.e. r x (L + 2).
Var rfft_rows(const Var& a);

}  // namespace clfm::ad

#include <cmath>
#include <numbers>
#include <sstream>

#include "clfm/ad/graph.hpp"
#include "clfm/fieldgen/fft.hpp"

namespace clfm::ad {
namespace {

using Eigen::Index;

std::string shape_of(const Matrix& m) {
  std::ostringstream os;
  os << "(" << m.rows() << "x" << m.cols() << ")";
  return os.str();
}

Index broadcast_dim(const char* op, const Matrix& a, const Matrix& b, Index da, Index db) {
  if (da == db) return da;
  if (da == 1) return db;
  if (db == 1) return da;
  throw ShapeError(op, "shapes " + shape_of(a) + " and " + shape_of(b) + " do not broadcast");
}

Matrix expand(const Matrix& a, Index rows, Index cols) {
  if (a.rows() == rows && a.cols() == cols) return a;
  return a.replicate(rows / a.rows(), cols / a.cols());
}

// Sums a broadcast gradient back down to the operand's shape.
Matrix reduce_to(const Matrix& g, Index rows, Index cols) {
  if (g.rows() == rows && g.cols() == cols) return g;
  if (rows == 1 && cols == 1) return Matrix::Constant(1, 1, g.sum());
  if (rows == 1) return g.colwise().sum();
  return g.rowwise().sum();
}

bool needs(const Node& self, std::size_t i) { return self.parents[i]->requires_grad; }
const Matrix& in(const Node& self, std::size_t i) { return self.parents[i]->value; }

template <typename Forward, typename GradA, typename GradB>
Var binary(const char* op, const Var& a, const Var& b, Forward fwd, GradA ga, GradB gb) {
  const Index r = broadcast_dim(op, a.value(), b.value(), a.rows(), b.rows());
  const Index c = broadcast_dim(op, a.value(), b.value(), a.cols(), b.cols());
  Matrix ea = expand(a.value(), r, c);
  Matrix eb = expand(b.value(), r, c);
  Matrix out = fwd(ea, eb);
  return Var::make(std::move(out), op, {a, b}, [r, c, ga, gb](Node& self) {
    Matrix xa = expand(in(self, 0), r, c);
    Matrix xb = expand(in(self, 1), r, c);
    if (needs(self, 0)) {
      self.parents[0]->accumulate(reduce_to(ga(self.grad, xa, xb), in(self, 0).rows(),
                                            in(self, 0).cols()));
    }
    if (needs(self, 1)) {
      self.parents[1]->accumulate(reduce_to(gb(self.grad, xa, xb), in(self, 1).rows(),
                                            in(self, 1).cols()));
    }
  });
}

// Unary op whose derivative is expressed via input x and output y.
template <typename Forward, typename Deriv>
Var unary(const char* op, const Var& a, Forward fwd, Deriv deriv) {
  Matrix out = fwd(a.value());
  return Var::make(out, op, {a}, [out, deriv](Node& self) {
    self.parents[0]->accumulate(deriv(self.grad, in(self, 0), out));
  });
}

}  // namespace

Var add(const Var& a, const Var& b) {
  return binary(
      "add", a, b, [](const Matrix& x, const Matrix& y) -> Matrix { return x + y; },
      [](const Matrix& g, const Matrix&, const Matrix&) -> Matrix { return g; },
      [](const Matrix& g, const Matrix&, const Matrix&) -> Matrix { return g; });
}

Var sub(const Var& a, const Var& b) {
  return binary(
      "sub", a, b, [](const Matrix& x, const Matrix& y) -> Matrix { return x - y; },
      [](const Matrix& g, const Matrix&, const Matrix&) -> Matrix { return g; },
      [](const Matrix& g, const Matrix&, const Matrix&) -> Matrix { return -g; });
}

Var mul(const Var& a, const Var& b) {
  return binary(
      "mul", a, b,
      [](const Matrix& x, const Matrix& y) -> Matrix { return x.cwiseProduct(y); },
      [](const Matrix& g, const Matrix&, const Matrix& y) -> Matrix {
        return g.cwiseProduct(y);
      },
      [](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
        return g.cwiseProduct(x);
      });
}

Var div(const Var& a, const Var& b) {
  return binary(
      "div", a, b,
      [](const Matrix& x, const Matrix& y) -> Matrix { return x.cwiseQuotient(y); },
      [](const Matrix& g, const Matrix&, const Matrix& y) -> Matrix {
        return g.cwiseQuotient(y);
      },
      [](const Matrix& g, const Matrix& x, const Matrix& y) -> Matrix {
        return -(g.array() * x.array() / y.array().square()).matrix();
      });
}

Var neg(const Var& a) { return scale(a, -1.0); }

Var scale(const Var& a, double c) {
  return Var::make(a.value() * c, "scale", {a},
                   [c](Node& self) { self.parents[0]->accumulate(self.grad * c); });
}

Var add_scalar(const Var& a, double c) {
  return Var::make((a.value().array() + c).matrix(), "add_scalar", {a},
                   [](Node& self) { self.parents[0]->accumulate(self.grad); });
}

Var square(const Var& a) {
  return unary(
      "square", a, [](const Matrix& x) -> Matrix { return x.array().square().matrix(); },
      [](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
        return (2.0 * g.array() * x.array()).matrix();
      });
}

Var sqrt(const Var& a) {
  return unary(
      "sqrt", a, [](const Matrix& x) -> Matrix { return x.array().sqrt().matrix(); },
      [](const Matrix& g, const Matrix&, const Matrix& y) -> Matrix {
        return (0.5 * g.array() / y.array()).matrix();
      });
}

Var exp(const Var& a) {
  return unary(
      "exp", a, [](const Matrix& x) -> Matrix { return x.array().exp().matrix(); },
      [](const Matrix& g, const Matrix&, const Matrix& y) -> Matrix {
        return g.cwiseProduct(y);
      });
}

Var log(const Var& a) {
  return unary(
      "log", a, [](const Matrix& x) -> Matrix { return x.array().log().matrix(); },
      [](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
        return g.cwiseQuotient(x);
      });
}

Var tanh(const Var& a) {
  return unary(
      "tanh", a, [](const Matrix& x) -> Matrix { return x.array().tanh().matrix(); },
      [](const Matrix& g, const Matrix&, const Matrix& y) -> Matrix {
        return (g.array() * (1.0 - y.array().square())).matrix();
      });
}

Var sigmoid(const Var& a) {
  return unary(
      "sigmoid", a,
      [](const Matrix& x) -> Matrix { return (1.0 / (1.0 + (-x.array()).exp())).matrix(); },
      [](const Matrix& g, const Matrix&, const Matrix& y) -> Matrix {
        return (g.array() * y.array() * (1.0 - y.array())).matrix();
      });
}

namespace {
constexpr double kGeluScale = 0.7978845608028654;  // sqrt(2/pi)
constexpr double kGeluCubic = 0.044715;
}  // namespace

Var gelu(const Var& a) {
  constexpr double k = kGeluScale;
  constexpr double c = kGeluCubic;
  const auto x = a.value().array();
  Matrix t = (k * (x + c * x.cube())).tanh().matrix();
  Matrix out = (0.5 * x * (1.0 + t.array())).matrix();
  return Var::make(std::move(out), "gelu", {a}, [t = std::move(t)](Node& self) {
    const auto xv = in(self, 0).array();
    const auto tv = t.array();
    Matrix d = (0.5 * (1.0 + tv) +
                0.5 * xv * (1.0 - tv.square()) * kGeluScale *
                    (1.0 + 3.0 * kGeluCubic * xv.square()))
                   .matrix();
    self.parents[0]->accumulate(self.grad.cwiseProduct(d));
  });
}

Var silu(const Var& a) {
  Matrix s = (1.0 / (1.0 + (-a.value().array()).exp())).matrix();
  Matrix out = a.value().cwiseProduct(s);
  return Var::make(std::move(out), "silu", {a}, [s = std::move(s)](Node& self) {
    const auto xv = in(self, 0).array();
    const auto sv = s.array();
    self.parents[0]->accumulate(
        (self.grad.array() * sv * (1.0 + xv * (1.0 - sv))).matrix());
  });
}

Var clamp(const Var& a, double lo, double hi) {
  return unary(
      "clamp", a, [lo, hi](const Matrix& x) -> Matrix { return x.cwiseMax(lo).cwiseMin(hi); },
      [lo, hi](const Matrix& g, const Matrix& x, const Matrix&) -> Matrix {
        return (x.array() >= lo && x.array() <= hi).select(g.array(), 0.0).matrix();
      });
}

Var matmul(const Var& a, const Var& b) {
  if (a.cols() != b.rows()) {
    throw ShapeError("matmul", "shapes " + shape_of(a.value()) + " and " + shape_of(b.value()) +
                                   " are not aligned");
  }
  Matrix out(a.rows(), b.cols());
  out.noalias() = a.value() * b.value();
  return Var::make(std::move(out), "matmul", {a, b}, [](Node& self) {
    if (needs(self, 0)) {
      Matrix ga(in(self, 0).rows(), in(self, 0).cols());
      ga.noalias() = self.grad * in(self, 1).transpose();
      self.parents[0]->accumulate(ga);
    }
    if (needs(self, 1)) {
      Matrix gb(in(self, 1).rows(), in(self, 1).cols());
      gb.noalias() = in(self, 0).transpose() * self.grad;
      self.parents[1]->accumulate(gb);
    }
  });
}

Var transpose(const Var& a) {
  return Var::make(a.value().transpose(), "transpose", {a},
                   [](Node& self) { self.parents[0]->accumulate(self.grad.transpose()); });
}

Var sum(const Var& a) {
  return Var::make(Matrix::Constant(1, 1, a.value().sum()), "sum", {a}, [](Node& self) {
    const Matrix& x = in(self, 0);
    self.parents[0]->accumulate(Matrix::Constant(x.rows(), x.cols(), self.grad(0, 0)));
  });
}

Var mean(const Var& a) {
  const double n = static_cast<double>(a.size());
  return Var::make(Matrix::Constant(1, 1, a.value().mean()), "mean", {a}, [n](Node& self) {
    const Matrix& x = in(self, 0);
    self.parents[0]->accumulate(Matrix::Constant(x.rows(), x.cols(), self.grad(0, 0) / n));
  });
}

Var sum_rows(const Var& a) {
  return Var::make(a.value().colwise().sum(), "sum_rows", {a}, [](Node& self) {
    self.parents[0]->accumulate(self.grad.replicate(in(self, 0).rows(), 1));
  });
}

Var mean_rows(const Var& a) { return scale(sum_rows(a), 1.0 / static_cast<double>(a.rows())); }

Var sum_cols(const Var& a) {
  return Var::make(a.value().rowwise().sum(), "sum_cols", {a}, [](Node& self) {
    self.parents[0]->accumulate(self.grad.replicate(1, in(self, 0).cols()));
  });
}

Var mean_cols(const Var& a) { return scale(sum_cols(a), 1.0 / static_cast<double>(a.cols())); }

Var dot(const Var& a, const Var& b) {
  if (a.rows() != b.rows() || a.cols() != b.cols()) {
    throw ShapeError("dot", "shapes " + shape_of(a.value()) + " and " + shape_of(b.value()) +
                                " differ");
  }
  return sum(mul(a, b));
}

Var concat_cols(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_cols", "no operands");
  const Index r = parts.front().rows();
  Index c = 0;
  for (const auto& p : parts) {
    if (p.rows() != r) {
      throw ShapeError("concat_cols", "row counts differ: " + shape_of(parts.front().value()) +
                                          " vs " + shape_of(p.value()));
    }
    c += p.cols();
  }
  Matrix out(r, c);
  Index offset = 0;
  for (const auto& p : parts) {
    out.middleCols(offset, p.cols()) = p.value();
    offset += p.cols();
  }
  return Var::make(std::move(out), "concat_cols", parts, [](Node& self) {
    Index off = 0;
    for (auto& p : self.parents) {
      const Index w = p->value.cols();
      if (p->requires_grad) p->accumulate(self.grad.middleCols(off, w));
      off += w;
    }
  });
}

Var concat_rows(const std::vector<Var>& parts) {
  if (parts.empty()) throw ShapeError("concat_rows", "no operands");
  const Index c = parts.front().cols();
  Index r = 0;
  for (const auto& p : parts) {
    if (p.cols() != c) {
      throw ShapeError("concat_rows", "column counts differ: " +
                                          shape_of(parts.front().value()) + " vs " +
                                          shape_of(p.value()));
    }
    r += p.rows();
  }
  Matrix out(r, c);
  Index offset = 0;
  for (const auto& p : parts) {
    out.middleRows(offset, p.rows()) = p.value();
    offset += p.rows();
  }
  return Var::make(std::move(out), "concat_rows", parts, [](Node& self) {
    Index off = 0;
    for (auto& p : self.parents) {
      const Index h = p->value.rows();
      if (p->requires_grad) p->accumulate(self.grad.middleRows(off, h));
      off += h;
    }
  });
}

Var slice_cols(const Var& a, Index start, Index count) {
  if (start < 0 || count < 1 || start + count > a.cols()) {
    throw ShapeError("slice_cols", "range [" + std::to_string(start) + ", " +
                                       std::to_string(start + count) + ") outside " +
                                       shape_of(a.value()));
  }
  return Var::make(a.value().middleCols(start, count), "slice_cols", {a},
                   [start, count](Node& self) {
                     const Matrix& x = in(self, 0);
                     Matrix g = Matrix::Zero(x.rows(), x.cols());
                     g.middleCols(start, count) = self.grad;
                     self.parents[0]->accumulate(g);
                   });
}

Var slice_rows(const Var& a, Index start, Index count) {
  if (start < 0 || count < 1 || start + count > a.rows()) {
    throw ShapeError("slice_rows", "range [" + std::to_string(start) + ", " +
                                       std::to_string(start + count) + ") outside " +
                                       shape_of(a.value()));
  }
  return Var::make(a.value().middleRows(start, count), "slice_rows", {a},
                   [start, count](Node& self) {
                     const Matrix& x = in(self, 0);
                     Matrix g = Matrix::Zero(x.rows(), x.cols());
                     g.middleRows(start, count) = self.grad;
                     self.parents[0]->accumulate(g);
                   });
}

Var gather_rows(const Var& a, const std::vector<Index>& rows) {
  Matrix out(static_cast<Index>(rows.size()), a.cols());
  for (std::size_t i = 0; i < rows.size(); ++i) {
    if (rows[i] < 0 || rows[i] >= a.rows()) {
      throw ShapeError("gather_rows", "row " + std::to_string(rows[i]) + " outside " +
                                          shape_of(a.value()));
    }
    out.row(static_cast<Index>(i)) = a.value().row(rows[i]);
  }
  return Var::make(std::move(out), "gather_rows", {a}, [rows](Node& self) {
    const Matrix& x = in(self, 0);
    Matrix g = Matrix::Zero(x.rows(), x.cols());
    for (std::size_t i = 0; i < rows.size(); ++i) g.row(rows[i]) += self.grad.row(static_cast<Index>(i));
    self.parents[0]->accumulate(g);
  });
}

Var layer_norm(const Var& x, const Var& gain, const Var& shift, double eps) {
  Var centered = sub(x, mean_cols(x));
  Var var = mean_cols(square(centered));
  Var normalized = div(centered, sqrt(add_scalar(var, eps)));
  return add(mul(normalized, gain), shift);
}

Var rfft_rows(const Var& a) {
  const Index n = a.cols();
  fieldgen::require_power_of_two(n, "rfft_rows");
  const Index bins = n / 2 + 1;
  Matrix out(a.rows(), 2 * bins);
  Eigen::FFT<double> engine;
  Eigen::VectorXd row(n);
  Eigen::VectorXcd spectrum;
  for (Index r = 0; r < a.rows(); ++r) {
    row = a.value().row(r).transpose();
    engine.fwd(spectrum, row);
    for (Index k = 0; k < bins; ++k) {
      out(r, k) = spectrum(k).real();
      out(r, bins + k) = spectrum(k).imag();
    }
  }
  return Var::make(std::move(out), "rfft_rows", {a}, [n, bins](Node& self) {
    // Adjoint of the truncated real DFT: Re(N * ifft(G)) with G zero above L/2.
    Matrix g(self.grad.rows(), n);
    Eigen::FFT<double> eng;
    Eigen::VectorXcd spec = Eigen::VectorXcd::Zero(n);
    Eigen::VectorXcd time;
    for (Index r = 0; r < self.grad.rows(); ++r) {
      for (Index k = 0; k < bins; ++k) {
        spec(k) = {self.grad(r, k), self.grad(r, bins + k)};
      }
      eng.inv(time, spec);
      g.row(r) = (time.real() * static_cast<double>(n)).transpose();
    }
    self.parents[0]->accumulate(g);
  });
}

}  // namespace clfm::ad

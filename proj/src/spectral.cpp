#include "mhdlab/spectral.hpp"

#include <algorithm>
#include <cmath>
#include <string>

#include "mhdlab/errors.hpp"

namespace mhdlab {

void require_same_grid(const Grid& a, const Grid& b, const char* where) {
  if (!a.compatible(b)) {
    throw ConfigError(std::string(where) + ": fields live on different grids");
  }
}

PhysicalField::PhysicalField(GridPtr grid) : grid_(std::move(grid)), values_(grid_->physical_size(), 0.0) {}

ScalarField::ScalarField(GridPtr grid) : grid_(std::move(grid)), coeffs_(grid_->spectral_size(), Complex{}) {}

ScalarField& ScalarField::operator+=(const ScalarField& o) {
  require_same_grid(grid(), o.grid(), "ScalarField +=");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += o.coeffs_[i];
  return *this;
}

ScalarField& ScalarField::operator-=(const ScalarField& o) {
  require_same_grid(grid(), o.grid(), "ScalarField -=");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] -= o.coeffs_[i];
  return *this;
}

ScalarField& ScalarField::operator*=(double a) {
  for (auto& c : coeffs_) c *= a;
  return *this;
}

ScalarField& ScalarField::axpy(double a, const ScalarField& o) {
  require_same_grid(grid(), o.grid(), "ScalarField axpy");
  for (std::size_t i = 0; i < coeffs_.size(); ++i) coeffs_[i] += a * o.coeffs_[i];
  return *this;
}

std::string_view to_string(ParityClass c) {
  return c == ParityClass::velocity_like ? "velocity_like" : "magnetic_like";
}

ParityClass parity_class_from_string(std::string_view s) {
  if (s == "velocity_like") return ParityClass::velocity_like;
  if (s == "magnetic_like") return ParityClass::magnetic_like;
  throw ConfigError("unknown parity class '" + std::string(s) + "'");
}

ParityClass opposite(ParityClass c) {
  return c == ParityClass::velocity_like ? ParityClass::magnetic_like : ParityClass::velocity_like;
}

VectorField::VectorField(GridPtr grid) : components{ScalarField(grid), ScalarField(grid)} {}

VectorField& VectorField::operator+=(const VectorField& o) {
  components[0] += o.components[0];
  components[1] += o.components[1];
  return *this;
}

VectorField& VectorField::operator-=(const VectorField& o) {
  components[0] -= o.components[0];
  components[1] -= o.components[1];
  return *this;
}

VectorField& VectorField::operator*=(double a) {
  components[0] *= a;
  components[1] *= a;
  return *this;
}

VectorField& VectorField::axpy(double a, const VectorField& o) {
  components[0].axpy(a, o.components[0]);
  components[1].axpy(a, o.components[1]);
  return *this;
}

ScalarField forward_transform(const PhysicalField& f) {
  const Grid& g = f.grid();
  if (f.values().size() != g.physical_size()) {
    throw ConfigError("forward_transform: sample count does not match the grid");
  }
  ScalarField out(f.grid_ptr());
  g.execute_forward(f.data(), out.coeffs().data());
  const double scale = 1.0 / static_cast<double>(g.physical_size());
  for (auto& c : out.coeffs()) c *= scale;
  return out;
}

PhysicalField inverse_transform(const ScalarField& f) {
  const Grid& g = f.grid();
  AlignedVector<Complex> work(f.coeffs().begin(), f.coeffs().end());
  PhysicalField out(f.grid_ptr());
  g.execute_inverse(work.data(), out.data());
  return out;
}

ScalarField fractional_multiplier(const ScalarField& f, double s, ZeroModePolicy policy) {
  ScalarField out = f;
  if (s == 0.0) return out;
  auto c = out.coeffs();
  const Grid& g = f.grid();
  if (s < 0.0) {
    const double scale = std::max(max_coefficient(f), 1e-300);
    if (std::abs(c[0]) > 1e-12 * scale && policy == ZeroModePolicy::reject) {
      throw PreconditionError("fractional_multiplier: negative order requires a vanishing zero mode");
    }
  }
  c[0] = 0.0;
  for (std::size_t i = 1; i < c.size(); ++i) c[i] *= std::pow(g.k_squared(i), 0.5 * s);
  return out;
}

ScalarField derivative(const ScalarField& f, int axis) {
  const Grid& g = f.grid();
  ScalarField out(f.grid_ptr());
  auto in = f.coeffs();
  auto o = out.coeffs();
  for (std::size_t i = 0; i < o.size(); ++i) {
    const double k = axis == 0 ? g.k1_deriv(i) : g.k2_deriv(i);
    o[i] = Complex(-k * in[i].imag(), k * in[i].real());
  }
  return out;
}

ScalarField laplacian(const ScalarField& f) {
  const Grid& g = f.grid();
  ScalarField out = f;
  auto o = out.coeffs();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] *= -g.k_squared(i);
  return out;
}

ScalarField helmholtz_solve(const ScalarField& f, double alpha) {
  if (alpha < 0.0) throw PreconditionError("helmholtz_solve: alpha must be >= 0");
  const Grid& g = f.grid();
  ScalarField out = f;
  if (alpha == 0.0) return out;
  auto o = out.coeffs();
  for (std::size_t i = 0; i < o.size(); ++i) o[i] /= (1.0 + alpha * g.k_squared(i));
  return out;
}

void dealias_in_place(ScalarField& f) {
  const Grid& g = f.grid();
  auto o = f.coeffs();
  for (std::size_t i = 0; i < o.size(); ++i) {
    if (!g.kept(i)) o[i] = 0.0;
  }
}

ScalarField dealias(const ScalarField& f) {
  ScalarField out = f;
  dealias_in_place(out);
  return out;
}

ScalarField prolong(const ScalarField& f, const GridPtr& target) {
  const Grid& src = f.grid();
  const Grid& dst = *target;
  if (src.box_half_length() != dst.box_half_length()) {
    throw ConfigError("prolong: grids must share the box");
  }
  ScalarField out(target);
  // Modes common to both lattices, excluding either Nyquist line.
  const int half = std::min(src.n(), dst.n()) / 2;
  for (int m1 = -half + 1; m1 < half; ++m1) {
    const int s1 = m1 >= 0 ? m1 : m1 + src.n();
    const int d1 = m1 >= 0 ? m1 : m1 + dst.n();
    for (int m2 = 0; m2 < half; ++m2) {
      out[static_cast<std::size_t>(d1) * dst.nk() + m2] = f[static_cast<std::size_t>(s1) * src.nk() + m2];
    }
  }
  return out;
}

ScalarField product(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid(), g.grid(), "product");
  PhysicalField a = inverse_transform(f);
  PhysicalField b = inverse_transform(g);
  auto av = a.values();
  auto bv = b.values();
  for (std::size_t p = 0; p < av.size(); ++p) av[p] *= bv[p];
  ScalarField out = forward_transform(a);
  dealias_in_place(out);
  return out;
}

VectorField leray_project(const VectorField& v) {
  require_same_grid(v[0].grid(), v[1].grid(), "leray_project");
  const Grid& g = v.grid();
  VectorField out = v;
  auto a = out[0].coeffs();
  auto b = out[1].coeffs();
  for (std::size_t i = 0; i < a.size(); ++i) {
    const double k1 = g.k1_deriv(i);
    const double k2 = g.k2_deriv(i);
    const double kk = k1 * k1 + k2 * k2;
    if (kk == 0.0) continue;
    const Complex kv = (k1 * a[i] + k2 * b[i]) / kk;
    a[i] -= k1 * kv;
    b[i] -= k2 * kv;
  }
  out.divergence_free = true;
  return out;
}

ScalarField divergence(const VectorField& v) {
  return derivative(v[0], 0) + derivative(v[1], 1);
}

ScalarField curl(const VectorField& v) {
  return derivative(v[1], 0) - derivative(v[0], 1);
}

VectorField dealias(const VectorField& v) {
  VectorField out = v;
  dealias_in_place(out[0]);
  dealias_in_place(out[1]);
  return out;
}

VectorField laplacian(const VectorField& v) {
  VectorField out{laplacian(v[0]), laplacian(v[1])};
  out.parity = v.parity;
  out.divergence_free = v.divergence_free;
  return out;
}

double inner(const ScalarField& f, const ScalarField& g) {
  require_same_grid(f.grid(), g.grid(), "inner");
  const Grid& gr = f.grid();
  auto a = f.coeffs();
  auto b = g.coeffs();
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    s += gr.multiplicity(i) * (a[i].real() * b[i].real() + a[i].imag() * b[i].imag());
  }
  return gr.area() * s;
}

double inner(const VectorField& f, const VectorField& g) {
  return inner(f[0], g[0]) + inner(f[1], g[1]);
}

double l2_norm(const ScalarField& f) { return std::sqrt(std::max(inner(f, f), 0.0)); }

double l2_norm(const VectorField& v) { return std::sqrt(std::max(inner(v, v), 0.0)); }

double relative_divergence(const VectorField& v) {
  const double grad = std::sqrt(std::pow(l2_norm(derivative(v[0], 0)), 2) + std::pow(l2_norm(derivative(v[0], 1)), 2) +
                                std::pow(l2_norm(derivative(v[1], 0)), 2) + std::pow(l2_norm(derivative(v[1], 1)), 2));
  if (grad == 0.0) return 0.0;
  return l2_norm(divergence(v)) / grad;
}

double max_coefficient(const ScalarField& f) {
  double m = 0.0;
  for (const auto& c : f.coeffs()) m = std::max(m, std::abs(c));
  return m;
}

}  // namespace mhdlab

#include <Eigen/SVD>
#include <random>

#include "birkhoff/hamilton.hpp"

namespace birkhoff {

namespace {

// chi flattened against a DenseMap for fast dense evaluation.
struct CompiledMono {
  Complex coef;  // multiplicity * stored coefficient
  std::vector<int> pos;
  std::vector<std::int8_t> sigma;
};

struct Compiled {
  std::vector<CompiledMono> monos;
  int n = 0;

  Compiled(const PolyHamiltonian& h, const DenseMap& map) : n(map.size()) {
    for (const auto& [deg, keys] : h.terms) {
      for (const auto& [key, c] : keys) {
        if (c == Complex{}) continue;
        CompiledMono m;
        m.coef = c * key_multiplicity(key);
        for (const auto& p : key) {
          m.pos.push_back(map.pos.at(p.n));
          m.sigma.push_back(p.sigma);
        }
        monos.push_back(std::move(m));
      }
    }
  }

  // field(u) = i grad chi(u)
  Eigen::VectorXcd field(const Eigen::VectorXcd& u) const {
    Eigen::VectorXcd g = Eigen::VectorXcd::Zero(n);
    std::vector<Complex> fac, pre, suf;
    for (const auto& m : monos) {
      const int r = int(m.pos.size());
      fac.resize(r);
      pre.assign(r + 1, Complex{1.0});
      suf.assign(r + 1, Complex{1.0});
      for (int j = 0; j < r; ++j) {
        Complex a = u[m.pos[j]];
        fac[j] = m.sigma[j] > 0 ? a : std::conj(a);
      }
      for (int j = 0; j < r; ++j) pre[j + 1] = pre[j] * fac[j];
      for (int j = r - 1; j >= 0; --j) suf[j] = suf[j + 1] * fac[j];
      for (int j = 0; j < r; ++j) {
        if (m.sigma[j] > 0) continue;
        Complex contrib = 2.0 * m.coef * pre[j] * suf[j + 1];
        g[m.pos[j]] += contrib;
      }
    }
    return Complex(0.0, 1.0) * g;
  }

  // Real Jacobian of the field in interleaved (Re,Im) coordinates.
  Eigen::MatrixXd jacobian(const Eigen::VectorXcd& u) const {
    Eigen::MatrixXd J = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    std::vector<Complex> fac;
    for (const auto& m : monos) {
      const int r = int(m.pos.size());
      fac.resize(r);
      for (int j = 0; j < r; ++j) {
        Complex a = u[m.pos[j]];
        fac[j] = m.sigma[j] > 0 ? a : std::conj(a);
      }
      for (int j = 0; j < r; ++j) {
        if (m.sigma[j] > 0) continue;
        // derivative of 2*coef*prod_{l != j} fac_l in each direction i
        for (int i = 0; i < r; ++i) {
          if (i == j) continue;
          Complex w = 2.0 * m.coef;
          for (int l = 0; l < r; ++l)
            if (l != i && l != j) w *= fac[l];
          // grad component before the i*: v -> w*v (sigma_i=+1) or
          // w*conj(v); multiply by i on the left for the field.
          Complex iw = Complex(0.0, 1.0) * w;
          int row = 2 * m.pos[j], col = 2 * m.pos[i];
          if (m.sigma[i] > 0) {
            J(row, col) += iw.real();
            J(row, col + 1) += -iw.imag();
            J(row + 1, col) += iw.imag();
            J(row + 1, col + 1) += iw.real();
          } else {
            J(row, col) += iw.real();
            J(row, col + 1) += iw.imag();
            J(row + 1, col) += iw.imag();
            J(row + 1, col + 1) += -iw.real();
          }
        }
      }
    }
    return J;
  }
};

// Dormand-Prince 5(4) coefficients.
constexpr double A21 = 1.0 / 5;
constexpr double A31 = 3.0 / 40, A32 = 9.0 / 40;
constexpr double A41 = 44.0 / 45, A42 = -56.0 / 15, A43 = 32.0 / 9;
constexpr double A51 = 19372.0 / 6561, A52 = -25360.0 / 2187,
                 A53 = 64448.0 / 6561, A54 = -212.0 / 729;
constexpr double A61 = 9017.0 / 3168, A62 = -355.0 / 33, A63 = 46732.0 / 5247,
                 A64 = 49.0 / 176, A65 = -5103.0 / 18656;
constexpr double B1 = 35.0 / 384, B3 = 500.0 / 1113, B4 = 125.0 / 192,
                 B5 = -2187.0 / 6784, B6 = 11.0 / 84;
constexpr double E1 = 35.0 / 384 - 5179.0 / 57600,
                 E3 = 500.0 / 1113 - 7571.0 / 16695,
                 E4 = 125.0 / 192 - 393.0 / 640,
                 E5 = -2187.0 / 6784 + 92097.0 / 339200,
                 E6 = 11.0 / 84 - 187.0 / 2100, E7 = -1.0 / 40;

struct StepperState {
  Eigen::VectorXcd u;
  Eigen::MatrixXd M;  // variational matrix (may be 0x0)
  bool with_m = false;
};

// One embedded step; returns the (5th order) proposal and the error
// estimate on u.
void dp_step(const Compiled& chi, const StepperState& s, double h,
             StepperState& out, double& err) {
  const auto f = [&](const StepperState& x, StepperState& k) {
    k.u = chi.field(x.u);
    if (s.with_m) k.M = chi.jacobian(x.u) * x.M;
  };
  StepperState k1, k2, k3, k4, k5, k6, k7, tmp;
  auto axpy = [&](StepperState& dst, const StepperState& base,
                  std::initializer_list<std::pair<double, const StepperState*>>
                      terms) {
    dst.u = base.u;
    if (s.with_m) dst.M = base.M;
    for (auto& [a, kk] : terms) {
      dst.u += (a * h) * kk->u;
      if (s.with_m) dst.M += (a * h) * kk->M;
    }
  };
  k1.with_m = k2.with_m = k3.with_m = k4.with_m = k5.with_m = k6.with_m =
      k7.with_m = tmp.with_m = s.with_m;
  f(s, k1);
  axpy(tmp, s, {{A21, &k1}});
  f(tmp, k2);
  axpy(tmp, s, {{A31, &k1}, {A32, &k2}});
  f(tmp, k3);
  axpy(tmp, s, {{A41, &k1}, {A42, &k2}, {A43, &k3}});
  f(tmp, k4);
  axpy(tmp, s, {{A51, &k1}, {A52, &k2}, {A53, &k3}, {A54, &k4}});
  f(tmp, k5);
  axpy(tmp, s, {{A61, &k1}, {A62, &k2}, {A63, &k3}, {A64, &k4}, {A65, &k5}});
  f(tmp, k6);
  axpy(out, s, {{B1, &k1}, {B3, &k3}, {B4, &k4}, {B5, &k5}, {B6, &k6}});
  out.with_m = s.with_m;
  f(out, k7);
  Eigen::VectorXcd e = (E1 * h) * k1.u + (E3 * h) * k3.u + (E4 * h) * k4.u +
                       (E5 * h) * k5.u + (E6 * h) * k6.u + (E7 * h) * k7.u;
  err = e.norm();
}

struct RunStats {
  int accepted = 0;
  int rejected = 0;
};

StepperState integrate_flow(const Compiled& chi, StepperState s, double t,
                            double tol, double guard_norm, RunStats& rs) {
  if (t == 0.0) return s;
  const double dir = t > 0 ? 1.0 : -1.0;
  double remaining = std::abs(t);
  double h = std::min(remaining, 0.1);
  StepperState prop;
  while (remaining > 0) {
    h = std::min(h, remaining);
    double err = 0;
    dp_step(chi, s, dir * h, prop, err);
    double scale = tol * std::max(1.0, s.u.norm());
    double ratio = err / scale;
    if (ratio <= 1.0) {
      s = std::move(prop);
      remaining -= h;
      ++rs.accepted;
      if (s.u.norm() > guard_norm)
        throw FlowFailure("flow: amplitude blowup past divergence guard",
                          "{\"norm\":" + std::to_string(s.u.norm()) + "}");
    } else {
      ++rs.rejected;
    }
    double factor = 0.9 * std::pow(std::max(ratio, 1e-10), -0.2);
    h *= std::clamp(factor, 0.2, 5.0);
    if (h < 1e-14 * std::abs(t))
      throw FlowFailure("flow: step controller underflow",
                        "{\"remaining\":" + std::to_string(remaining) + "}");
  }
  return s;
}

}  // namespace

Eigen::MatrixXd vector_field_jacobian(const PolyHamiltonian& chi,
                                      const DenseMap& map,
                                      const Eigen::VectorXcd& u) {
  return Compiled(chi, map).jacobian(u);
}

State FlowResult::apply_differential(const State& v) const {
  if (!dphi) throw InvalidInput("FlowResult: differential not requested");
  Eigen::VectorXcd vv = map.to_dense(v);
  Eigen::VectorXd x(2 * map.size());
  for (int i = 0; i < map.size(); ++i) {
    x[2 * i] = vv[i].real();
    x[2 * i + 1] = vv[i].imag();
  }
  Eigen::VectorXd y = (*dphi) * x;
  Eigen::VectorXcd w(map.size());
  for (int i = 0; i < map.size(); ++i) w[i] = Complex(y[2 * i], y[2 * i + 1]);
  return map.to_state(w);
}

double FlowResult::dphi_operator_norm(double s) const {
  if (!dphi) throw InvalidInput("FlowResult: differential not requested");
  Eigen::VectorXd w = map.jb_weights(s);
  Eigen::MatrixXd scaled = *dphi;
  for (int i = 0; i < map.size(); ++i) {
    scaled.row(2 * i) *= w[i];
    scaled.row(2 * i + 1) *= w[i];
    scaled.col(2 * i) /= w[i];
    scaled.col(2 * i + 1) /= w[i];
  }
  Eigen::JacobiSVD<Eigen::MatrixXd> svd(scaled);
  return svd.singularValues()[0];
}

FlowResult flow(const PolyHamiltonian& chi, const State& u0, double t,
                double tol, const FlowOptions& opts) {
  DenseMap map(chi.lattice);
  if (!(u0.lattice == chi.lattice))
    throw InvalidInput("flow: state lattice differs from generator lattice");
  Compiled compiled(chi, map);
  FlowResult res(map);

  StepperState s;
  s.u = map.to_dense(u0);
  s.with_m = opts.want_differential;
  const int n = map.size();
  if (s.with_m) s.M = Eigen::MatrixXd::Identity(2 * n, 2 * n);

  double guard = opts.divergence_guard * std::max(s.u.norm(), 1e-12);
  RunStats rs;
  StepperState final = integrate_flow(compiled, s, t, tol, guard, rs);
  res.u = map.to_state(final.u);
  res.steps_accepted = rs.accepted;
  res.steps_rejected = rs.rejected;
  if (s.with_m) res.dphi = std::move(final.M);

  if (opts.want_roundtrip) {
    StepperState back;
    back.u = map.to_dense(res.u);
    back.with_m = false;
    RunStats rs2;
    StepperState home = integrate_flow(compiled, back, -t, tol, guard, rs2);
    res.roundtrip_error = (home.u - map.to_dense(u0)).norm();
  }

  if (res.dphi && opts.symplectic_samples > 0) {
    std::mt19937_64 rng(opts.seed);
    std::normal_distribution<double> gauss;
    double worst = 0;
    auto omega2 = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b) {
      // (i v, w) with v,w in interleaved coordinates
      double acc = 0;
      for (int i = 0; i < n; ++i)
        acc += a[2 * i] * b[2 * i + 1] - a[2 * i + 1] * b[2 * i];
      return acc;
    };
    for (int k = 0; k < opts.symplectic_samples; ++k) {
      Eigen::VectorXd v(2 * n), w(2 * n);
      for (int i = 0; i < 2 * n; ++i) {
        v[i] = gauss(rng);
        w[i] = gauss(rng);
      }
      v.normalize();
      w.normalize();
      Eigen::VectorXd dv = (*res.dphi) * v, dw = (*res.dphi) * w;
      worst = std::max(worst, std::abs(omega2(dv, dw) - omega2(v, w)));
    }
    res.symplecticity_residual = worst;
  }
  return res;
}

}  // namespace birkhoff

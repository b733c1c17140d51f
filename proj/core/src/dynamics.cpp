#include "nlocal/dynamics.hpp"

#include "nlocal/errors.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <bit>
#include <cmath>
#include <cstring>
#include <numbers>
#include <vector>

namespace nlocal {

namespace {

using Complex = std::complex<double>;
using RowMatrix = Eigen::Matrix<Complex, Eigen::Dynamic, Eigen::Dynamic, Eigen::RowMajor>;

// Strip width in doubles: a d x kStrip block of interleaved re/im columns stays
// in L1 through both transforms.
constexpr int kStrip = 16;

// Four doubles; unaligned access allowed. Explicit vectors keep the short
// fixed-length loops free of runtime alias checks.
using V4 = double __attribute__((vector_size(32), aligned(8)));

// Unnormalized in-place Walsh-Hadamard transform across the d rows of a strip
// buffer holding W / 4 vectors per row. Columns are independent.
template <int W>
void wht_strip(V4* __restrict buf, int d) {
  constexpr int kV = W / 4;
  int h = 1;
  if ((std::countr_zero(static_cast<unsigned>(d)) & 1) != 0) {
    for (int j = 0; j < d; j += 2) {
      V4* a = buf + static_cast<std::ptrdiff_t>(j) * kV;
      for (int k = 0; k < kV; ++k) {
        const V4 x = a[k];
        const V4 y = a[k + kV];
        a[k] = x + y;
        a[k + kV] = x - y;
      }
    }
    h = 2;
  }
  for (; h < d; h *= 4) {
    const std::ptrdiff_t step = static_cast<std::ptrdiff_t>(h) * kV;
    for (int i = 0; i < d; i += 4 * h) {
      for (int j = i; j < i + h; ++j) {
        V4* a = buf + static_cast<std::ptrdiff_t>(j) * kV;
        for (int k = 0; k < kV; ++k) {
          const V4 p = a[k];
          const V4 q = a[k + step];
          const V4 u = a[k + 2 * step];
          const V4 v = a[k + 3 * step];
          const V4 s0 = p + q;
          const V4 d0 = p - q;
          const V4 s1 = u + v;
          const V4 d1 = u - v;
          a[k] = s0 + s1;
          a[k + step] = d0 + d1;
          a[k + 2 * step] = s0 - s1;
          a[k + 3 * step] = d0 - d1;
        }
      }
    }
  }
}

// Diagonal of sum_k c_k * (string with given mask) in the basis where those
// strings are diagonal.
Eigen::VectorXd diagonal_of(const std::vector<PauliTerm>& terms, Axis axis, int n) {
  const int d = dimension(n);
  Eigen::VectorXd diag = Eigen::VectorXd::Zero(d);
  for (const PauliTerm& t : terms) {
    if (t.axis != axis) continue;
    for (std::uint32_t b = 0; b < static_cast<std::uint32_t>(d); ++b) {
      diag[b] += t.coeff * parity_sign(b, t.mask);
    }
  }
  return diag;
}

// Right-hand side of the master equation in the Hadamard-rotated basis, where
// X strings and the collapse operators are diagonal or single-entry maps and
// Z strings become X-like. H~ = diag(dx) + W diag(dz) W.
class LindbladRhs {
 public:
  LindbladRhs(int n, const std::vector<PauliTerm>& static_terms,
              const std::vector<PauliTerm>& drive_terms, double omega, double gamma,
              bool decay, bool dephasing)
      : n_(n),
        d_(dimension(n)),
        omega_(omega),
        gamma_(gamma),
        decay_(decay && gamma > 0.0),
        dx_static_(diagonal_of(static_terms, Axis::X, n)),
        dz_static_(diagonal_of(static_terms, Axis::Z, n) / d_),
        dx_drive_(diagonal_of(drive_terms, Axis::X, n)),
        dz_drive_(diagonal_of(drive_terms, Axis::Z, n) / d_),
        work_(d_, d_),
        z_now_(static_cast<std::size_t>(d_)),
        x_now_(static_cast<std::size_t>(d_)),
        strip_(static_cast<std::size_t>(d_) * kStrip) {
    loss_.assign(2 * static_cast<std::size_t>(d_) * d_, 0.0);
    if (gamma_ > 0.0) {
      for (int j = 0; j < d_; ++j) {
        for (int k = 0; k < d_; ++k) {
          double rate = 0.0;
          if (dephasing) rate += gamma_ * __builtin_popcount(static_cast<unsigned>(j ^ k));
          if (decay) {
            const int zeros = 2 * n_ - __builtin_popcount(static_cast<unsigned>(j)) -
                              __builtin_popcount(static_cast<unsigned>(k));
            rate += 0.5 * gamma_ * zeros;
          }
          const std::size_t i = 2 * (static_cast<std::size_t>(j) * d_ + k);
          loss_[i] = loss_[i + 1] = rate;
        }
      }
    }
  }

  void operator()(const RowMatrix& rho, double t, RowMatrix& out) {
    const double c = std::cos(omega_ * t);
    const double* __restrict r = reinterpret_cast<const double*>(rho.data());
    double* __restrict w = reinterpret_cast<double*>(work_.data());
    double* __restrict o = reinterpret_cast<double*>(out.data());

    for (int j = 0; j < d_; ++j) {
      z_now_[static_cast<std::size_t>(j)] = dz_static_[j] + c * dz_drive_[j];
      x_now_[static_cast<std::size_t>(j)] = dx_static_[j] + c * dx_drive_[j];
    }
    switch (std::min(2 * d_, kStrip)) {
      case 4: hamiltonian_product<4>(r, w); break;
      case 8: hamiltonian_product<8>(r, w); break;
      default: hamiltonian_product<kStrip>(r, w); break;
    }

    // -i [H, rho] = -i (W - W^dagger) with W = H rho, tiled for the transpose.
    // Two complex entries per vector: with a = W(j,k), b = W(k,j),
    // out(j,k) = (Im a + Im b, Re b - Re a) - loss(j,k) rho(j,k).
    using V2 = double __attribute__((vector_size(16), aligned(8)));
    using I4 = long __attribute__((vector_size(32)));
    const V4 sign{1.0, -1.0, 1.0, -1.0};
    const I4 swap{1, 0, 3, 2};
    constexpr int kTile = 8;
    const double* __restrict loss = loss_.data();
    for (int jb = 0; jb < d_; jb += kTile) {
      for (int kb = 0; kb < d_; kb += kTile) {
        const int je = std::min(jb + kTile, d_);
        const int ke = std::min(kb + kTile, d_);
        for (int j = jb; j < je; ++j) {
          const std::ptrdiff_t row = 2 * static_cast<std::ptrdiff_t>(j) * d_;
          for (int k = kb; k < ke; k += 2) {
            const std::ptrdiff_t i = row + 2 * k;
            const V4 a = *reinterpret_cast<const V4*>(w + i);
            const V2 b0 = *reinterpret_cast<const V2*>(w + 2 * (static_cast<std::ptrdiff_t>(k) * d_ + j));
            const V2 b1 = *reinterpret_cast<const V2*>(w + 2 * (static_cast<std::ptrdiff_t>(k + 1) * d_ + j));
            const V4 b{b0[1], b0[0], b1[1], b1[0]};
            const V4 x = *reinterpret_cast<const V4*>(r + i);
            const V4 l = *reinterpret_cast<const V4*>(loss + i);
            *reinterpret_cast<V4*>(o + i) = __builtin_shuffle(a, swap) * sign + b - l * x;
          }
        }
      }
    }

    if (decay_) {
      const int len = 2 * d_;
      const double gamma = gamma_;
      {
        // sigma_i rho sigma_i^dagger with sigma_i = |1><0| on spin i in this
        // basis: out(j, k) += gamma rho(j ^ bit, k ^ bit) when both carry bit.
        for (int s = 0; s < n_; ++s) {
          const auto bit = static_cast<int>(spin_bit(s, n_));
          for (int j = 0; j < d_; ++j) {
            if (!(j & bit)) continue;
            double* __restrict dst = o + static_cast<std::ptrdiff_t>(j) * len;
            const double* __restrict src = r + static_cast<std::ptrdiff_t>(j ^ bit) * len;
            if (bit == 1) {
              // Complex column pairs (2q, 2q + 1): only the odd column gains.
              const V4 zero{0.0, 0.0, 0.0, 0.0};
              using I4 = long __attribute__((vector_size(32)));
              for (int k = 0; k < len; k += 4) {
                V4 a;
                std::memcpy(&a, src + k, sizeof a);
                V4 b;
                std::memcpy(&b, dst + k, sizeof b);
                b += gamma * __builtin_shuffle(zero, a, I4{0, 1, 4, 5});
                std::memcpy(dst + k, &b, sizeof b);
              }
              continue;
            }
            for (int kb = bit; kb < d_; kb += 2 * bit) {
              V4* dk = reinterpret_cast<V4*>(dst + 2 * kb);
              const V4* sk = reinterpret_cast<const V4*>(src + 2 * (kb - bit));
              for (int k = 0; k < bit / 2; ++k) dk[k] += gamma * sk[k];
            }
          }
        }
      }
    }
  }

 private:
  // w = H~ rho = diag(x) rho + W diag(z) W rho, one L1-sized column strip at a time.
  template <int S>
  void hamiltonian_product(const double* __restrict r, double* __restrict w) {
    constexpr int kV = S / 4;
    const int len = 2 * d_;
    V4* __restrict buf = reinterpret_cast<V4*>(strip_.data());
    const double* __restrict z = z_now_.data();
    const double* __restrict x = x_now_.data();
    for (int cb = 0; cb < len; cb += S) {
      for (int j = 0; j < d_; ++j) {
        const V4* src = reinterpret_cast<const V4*>(r + static_cast<std::ptrdiff_t>(j) * len + cb);
        for (int k = 0; k < kV; ++k) buf[j * kV + k] = src[k];
      }
      wht_strip<S>(buf, d_);
      for (int j = 0; j < d_; ++j) {
        for (int k = 0; k < kV; ++k) buf[j * kV + k] *= z[j];
      }
      wht_strip<S>(buf, d_);
      for (int j = 0; j < d_; ++j) {
        const V4* src = reinterpret_cast<const V4*>(r + static_cast<std::ptrdiff_t>(j) * len + cb);
        V4* dst = reinterpret_cast<V4*>(w + static_cast<std::ptrdiff_t>(j) * len + cb);
        for (int k = 0; k < kV; ++k) dst[k] = buf[j * kV + k] + x[j] * src[k];
      }
    }
  }

  int n_;
  int d_;
  double omega_;
  double gamma_;
  bool decay_;
  Eigen::VectorXd dx_static_;
  Eigen::VectorXd dz_static_;
  Eigen::VectorXd dx_drive_;
  Eigen::VectorXd dz_drive_;
  std::vector<double> loss_;  // row-major d x d, each rate twice (re and im lanes)
  RowMatrix work_;
  std::vector<double> z_now_;
  std::vector<double> x_now_;
  std::vector<double> strip_;
};

template <class Matrix>
void hadamard_rows_impl(Matrix& m) {
  const Eigen::Index d = m.rows();
  if (d == 0 || (d & (d - 1)) != 0) {
    throw DimensionMismatchError("hadamard_rows: row count must be a power of two");
  }
  for (Eigen::Index h = 1; h < d; h <<= 1) {
    for (Eigen::Index i = 0; i < d; i += 2 * h) {
      for (Eigen::Index j = i; j < i + h; ++j) {
        for (Eigen::Index k = 0; k < m.cols(); ++k) {
          const auto x = m(j, k);
          const auto y = m(j + h, k);
          m(j, k) = x + y;
          m(j + h, k) = x - y;
        }
      }
    }
  }
  m /= std::sqrt(static_cast<double>(d));
}

}  // namespace

void hadamard_rows(Eigen::Ref<Eigen::MatrixXcd> matrix) { hadamard_rows_impl(matrix); }
void hadamard_rows(Eigen::Ref<Eigen::MatrixXd> matrix) { hadamard_rows_impl(matrix); }

DriveSpec DriveSpec::nlocal(int n, double M, double omega) {
  SpinSubset all(static_cast<std::size_t>(n));
  for (int s = 0; s < n; ++s) all[static_cast<std::size_t>(s)] = s;
  return {omega, {{PauliString(Axis::Z, all, n), M}}};
}

double DriveSpec::total_amplitude() const {
  double total = 0.0;
  for (const DrivenTerm& t : terms) total += std::abs(t.amplitude);
  return total;
}

double resonant_frequency(const SpinSystemSpec& spec) {
  validate(spec);
  for (double e : spec.epsilon) {
    if (e != 0.0) throw UnsupportedRegimeError("resonant_frequency expects all epsilon_s = 0");
  }
  SpinSystemSpec off = spec;
  off.coupler_on = false;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(realize_hamiltonian(off),
                                                        Eigen::EigenvaluesOnly);
  if (solver.info() != Eigen::Success) throw EigensolverError("resonant_frequency: eigensolver failed");
  return solver.eigenvalues().maxCoeff() - solver.eigenvalues().minCoeff();
}

double state_contrast(const Eigen::MatrixXd& populations, int target, int excluded) {
  if (populations.rows() == 0) return 0.0;
  const double best_target = populations.col(target).maxCoeff();
  double best_other = 0.0;
  for (Eigen::Index m = 0; m < populations.cols(); ++m) {
    if (m == target || m == excluded) continue;
    best_other = std::max(best_other, populations.col(m).maxCoeff());
  }
  return best_target - best_other;
}

ContrastReport evolve_lindblad(const SpinSystemSpec& static_spec, const DriveSpec& drive,
                               const LindbladSpec& lindblad, double t_end,
                               const InitialState& initial, const IntegratorConfig& config) {
  validate(static_spec);
  const int n = static_spec.n;
  const int d = dimension(n);
  if (!(t_end > 0.0)) throw OutOfRangeError("evolve_lindblad: t_end must be > 0");
  if (!(lindblad.t2 > 0.0)) throw OutOfRangeError("evolve_lindblad: T2 must be > 0");
  if (!(drive.omega > 0.0)) throw OutOfRangeError("evolve_lindblad: drive omega must be > 0");
  if (!(config.sample_interval > 0.0) || config.steps_per_timescale < 1) {
    throw OutOfRangeError("evolve_lindblad: invalid integrator configuration");
  }
  std::vector<PauliTerm> drive_terms;
  for (const DrivenTerm& t : drive.terms) {
    if (t.op.n() != n) throw DimensionMismatchError("evolve_lindblad: driven term spin count");
    if (!std::isfinite(t.amplitude)) throw std::invalid_argument("non-finite drive amplitude");
    drive_terms.push_back({t.op.axis(), t.op.mask(), t.amplitude});
  }

  SpinSystemSpec off = static_spec;
  off.coupler_on = false;
  const std::vector<PauliTerm> static_terms = hamiltonian_terms(off);

  // Static eigenbasis, rotated into the Hadamard frame.
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> eig(realize_terms(static_terms, n));
  if (eig.info() != Eigen::Success) throw EigensolverError("evolve_lindblad: eigensolver failed");
  Eigen::MatrixXd basis = eig.eigenvectors();
  hadamard_rows(basis);

  ContrastReport report;
  report.energies.assign(eig.eigenvalues().begin(), eig.eigenvalues().end());
  for (int m = 0; m < d; ++m) {
    Eigen::Index label = 0;
    basis.col(m).cwiseAbs().maxCoeff(&label);
    report.labels.push_back(static_cast<std::uint32_t>(label));
  }
  Eigen::Index target = 0;
  Eigen::Index excluded = 0;
  basis.row(0).cwiseAbs().maxCoeff(&target);
  basis.row(d - 1).cwiseAbs().maxCoeff(&excluded);
  report.target_index = static_cast<int>(target);
  report.excluded_index = static_cast<int>(excluded);

  RowMatrix rho = RowMatrix::Zero(d, d);
  if (const auto* product = std::get_if<ProductXState>(&initial)) {
    if (product->n() != n) throw DimensionMismatchError("evolve_lindblad: initial state size");
    const auto idx = static_cast<Eigen::Index>(product->x_basis_index());
    rho(idx, idx) = 1.0;
  } else {
    Eigen::MatrixXcd dense = std::get<Eigen::MatrixXcd>(initial);
    if (dense.rows() != d || dense.cols() != d) {
      throw DimensionMismatchError("evolve_lindblad: initial density matrix size");
    }
    hadamard_rows(dense);
    Eigen::MatrixXcd right = dense.transpose();
    hadamard_rows(right);
    rho = right.transpose();
  }

  // Step selection.
  double timescale = 2.0 * std::numbers::pi / drive.omega;
  if (std::isfinite(lindblad.t2)) timescale = std::min(timescale, lindblad.t2);
  if (drive.total_amplitude() > 0.0) timescale = std::min(timescale, 1.0 / drive.total_amplitude());
  const double spread = eig.eigenvalues().maxCoeff() - eig.eigenvalues().minCoeff();
  if (spread > 0.0) timescale = std::min(timescale, 2.0 * std::numbers::pi / spread);
  const double h_max = timescale / config.steps_per_timescale;
  const long sub_steps = static_cast<long>(std::ceil(config.sample_interval / h_max - 1e-12));
  const double h = config.sample_interval / static_cast<double>(sub_steps);
  const long samples = static_cast<long>(std::ceil(t_end / config.sample_interval - 1e-9));
  report.step = h;

  const double gamma = std::isfinite(lindblad.t2) ? lindblad.gamma() : 0.0;
  LindbladRhs rhs(n, static_terms, drive_terms, drive.omega, gamma, lindblad.include_decay,
                  lindblad.include_dephasing);

  report.populations.resize(samples + 1, d);
  report.min_eigenvalue = 1.0;
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> positivity(d);

  auto record = [&](long sample, double t) {
    report.time_grid.push_back(t);
    Eigen::MatrixXcd dense = rho;
    const double herm = (dense - dense.adjoint()).cwiseAbs().maxCoeff();
    report.max_hermiticity_error = std::max(report.max_hermiticity_error, herm);
    const double trace_error = std::abs(dense.trace() - Complex(1.0, 0.0));
    report.max_trace_error = std::max(report.max_trace_error, trace_error);
    if (trace_error > config.max_trace_drift) {
      throw IntegratorAccuracyError("evolve_lindblad: trace drifted by " + std::to_string(trace_error) +
                                    " at t=" + std::to_string(t) + " ns");
    }
    const Eigen::MatrixXcd projected = dense * basis;
    for (int m = 0; m < d; ++m) {
      report.populations(sample, m) = (basis.col(m).transpose() * projected.col(m)).value().real();
    }
    Eigen::MatrixXcd hermitian = 0.5 * (dense + dense.adjoint());
    positivity.compute(hermitian, Eigen::EigenvaluesOnly);
    const double lowest = positivity.eigenvalues().minCoeff();
    report.min_eigenvalue = std::min(report.min_eigenvalue, lowest);
    if (lowest < -config.positivity_tolerance) report.positivity_violated = true;
    rho = hermitian;
  };

  RowMatrix k1(d, d), k2(d, d), k3(d, d), k4(d, d), stage(d, d);
  record(0, 0.0);
  for (long s = 1; s <= samples; ++s) {
    const double t_start = static_cast<double>(s - 1) * config.sample_interval;
    const double t_stop = std::min(static_cast<double>(s) * config.sample_interval, t_end);
    const long steps = std::max(1L, static_cast<long>(std::ceil((t_stop - t_start) / h - 1e-9)));
    const double dt = (t_stop - t_start) / static_cast<double>(steps);
    for (long i = 0; i < steps; ++i) {
      const double t = t_start + static_cast<double>(i) * dt;
      rhs(rho, t, k1);
      stage = rho + (0.5 * dt) * k1;
      rhs(stage, t + 0.5 * dt, k2);
      stage = rho + (0.5 * dt) * k2;
      rhs(stage, t + 0.5 * dt, k3);
      stage = rho + dt * k3;
      rhs(stage, t + dt, k4);
      rho += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4);
    }
    report.steps += steps;
    record(s, t_stop);
  }

  report.contrast = state_contrast(report.populations, report.target_index, report.excluded_index);
  return report;
}

}  // namespace nlocal

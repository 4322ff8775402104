#include "wgm/stark.hpp"

#include "wgm/constants.hpp"
#include "wgm/error.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <sstream>

namespace wgm::stark {

using angular::compound_tensor;
using angular::wigner3j;
using angular::wigner6j;
using constants::hbar;

double FieldSpec::amplitude_squared() const {
  return 2.0 * intensity / (constants::vacuum_permittivity * constants::speed_of_light);
}

double FieldSpec::intensity_from_amplitude(double amplitude) {
  return 0.5 * constants::vacuum_permittivity * constants::speed_of_light * amplitude * amplitude;
}

std::string HfsState::str() const { return "|" + F.str() + "," + M.str() + ">"; }

std::vector<HfsState> hfs_basis(HalfInt J, HalfInt I) {
  std::vector<HfsState> out;
  for (int tF = std::abs(J.twice() - I.twice()); tF <= J.twice() + I.twice(); tF += 2)
    for (int tM = -tF; tM <= tF; tM += 2) out.push_back({HalfInt::from_twice(tF), HalfInt::from_twice(tM)});
  return out;
}

double reduced_polarizability(const SpeciesData &species, const std::string &level, int K, double omega,
                              const PoleGuard &guard) {
  if (K < 0 || K > 2) throw Error(ErrorKind::domain, "K", "rank must be 0, 1 or 2");
  const auto &lv = species.level(level);
  const HalfInt J = lv.J;
  const HalfInt k = HalfInt::from_int(K);
  const HalfInt one = HalfInt::from_int(1);
  double sum = 0.0;
  for (const auto &c : atomdata::lines_coupling_to(species, level)) {
    const double pole = std::abs(c.omega);
    const bool allowed = std::find(guard.allowed_lines.begin(), guard.allowed_lines.end(), c.line->key) !=
                         guard.allowed_lines.end();
    if (std::abs(omega - pole) < (allowed ? 0.0 : guard.min_detuning) || omega == pole)
      throw Error(ErrorKind::resonance, "line." + c.line->key,
                  "light frequency inside the pole guard of this line");
    const double w6 = wigner6j(one, k, one, J, c.partner_J, J);
    if (w6 == 0.0) continue;
    // (-1)^{K+J+1} (-1)^{J'}; J + J' is always integral
    const double sign = parity_sign(k + J + one + c.partner_J);
    const double d2 = c.line->reduced_dipole * c.line->reduced_dipole;
    const double denom = 1.0 / (c.omega - omega) + ((K % 2) ? -1.0 : 1.0) / (c.omega + omega);
    sum += sign * w6 * d2 / hbar * denom;
  }
  return std::sqrt(2.0 * K + 1.0) * sum;
}

Eigen::MatrixXcd stark_matrix(const SpeciesData &species, const std::string &level, const FieldSpec &field) {
  const auto &lv = species.level(level);
  const HalfInt J = lv.J;
  const HalfInt I = species.I;
  const auto basis = hfs_basis(J, I);
  const auto n = static_cast<Eigen::Index>(basis.size());
  Eigen::MatrixXcd H = Eigen::MatrixXcd::Zero(n, n);
  if (field.intensity == 0.0) return H;

  double alpha[3];
  std::complex<double> tensor[3][5];
  for (int K = 0; K <= 2; ++K) {
    alpha[K] = reduced_polarizability(species, level, K, field.omega, field.guard);
    for (int q = -K; q <= K; ++q) tensor[K][q + 2] = compound_tensor(field.pol, K, q);
  }
  const double scale = field.amplitude_squared() / 4.0 / hbar;

  for (Eigen::Index i = 0; i < n; ++i) {
    const auto &[F, M] = basis[static_cast<std::size_t>(i)];
    for (Eigen::Index j = 0; j < n; ++j) {
      const auto &[Fp, Mp] = basis[static_cast<std::size_t>(j)];
      std::complex<double> s = 0.0;
      for (int K = 0; K <= 2; ++K) {
        if (alpha[K] == 0.0) continue;
        const HalfInt k = HalfInt::from_int(K);
        const double w6 = wigner6j(F, k, Fp, J, I, J);
        if (w6 == 0.0) continue;
        for (int q = -K; q <= K; ++q) {
          const HalfInt hq = HalfInt::from_int(q);
          const double w3 = wigner3j(F, k, Fp, M, hq, -Mp);
          if (w3 == 0.0) continue;
          const double phase = parity_sign(J + I + k + hq - M);
          s += alpha[K] * tensor[K][q + 2] * phase *
               std::sqrt(static_cast<double>(F.multiplicity() * Fp.multiplicity())) * w3 * w6;
        }
      }
      H(i, j) = scale * s;
    }
  }
  return H;
}

double hfs_energy(const SpeciesData &species, const std::string &level, HalfInt F) {
  const auto &c = species.hfs_for(level);
  const double J = species.level(level).J.value();
  const double I = species.I.value();
  const double f = F.value();
  const double G = f * (f + 1) - I * (I + 1) - J * (J + 1);
  double v = c.A * G / 2.0;
  if (J >= 1.0 && I >= 1.0)
    v += c.B * (1.5 * G * (G + 1) - 2.0 * I * (I + 1) * J * (J + 1)) / (4.0 * I * (2 * I - 1) * J * (2 * J - 1));
  return constants::two_pi * v;
}

Eigen::MatrixXcd hfs_matrix(const SpeciesData &species, const std::string &level) {
  const auto basis = hfs_basis(species.level(level).J, species.I);
  Eigen::VectorXcd d(static_cast<Eigen::Index>(basis.size()));
  for (std::size_t i = 0; i < basis.size(); ++i)
    d[static_cast<Eigen::Index>(i)] = hfs_energy(species, level, basis[i].F);
  return d.asDiagonal();
}

std::size_t ShiftTable::index(const HfsState &s) const {
  const auto it = std::find(basis.begin(), basis.end(), s);
  if (it == basis.end()) throw Error(ErrorKind::domain, "state", "state " + s.str() + " not in " + level);
  return static_cast<std::size_t>(it - basis.begin());
}

double ShiftTable::shift(const HfsState &s) const {
  const auto i = static_cast<Eigen::Index>(index(s));
  return eigenvalues[i] - bare_hfs[i];
}

namespace {

// Inside each degenerate eigenvalue cluster, replace the arbitrary eigenbasis
// by the projections of the best-matching reference vectors.
void resolve_degenerate(const Eigen::VectorXd &values, Eigen::MatrixXcd &V, const Eigen::MatrixXcd &R) {
  const Eigen::Index n = values.size();
  const double tol = 1e-9 * std::max(1.0, values.cwiseAbs().maxCoeff());
  Eigen::Index start = 0;
  while (start < n) {
    Eigen::Index end = start + 1;
    while (end < n && values[end] - values[end - 1] <= tol) ++end;
    const Eigen::Index k = end - start;
    if (k > 1) {
      const Eigen::MatrixXcd Vg = V.middleCols(start, k);
      const Eigen::MatrixXcd P = Vg * Vg.adjoint();
      std::vector<std::pair<double, Eigen::Index>> weight;
      for (Eigen::Index j = 0; j < R.cols(); ++j) weight.emplace_back(-(P * R.col(j)).norm(), j);
      std::stable_sort(weight.begin(), weight.end(),
                       [](const auto &a, const auto &b) { return a.first < b.first; });
      Eigen::Index filled = 0;
      for (const auto &[w, j] : weight) {
        if (filled == k) break;
        Eigen::VectorXcd v = P * R.col(j);
        for (Eigen::Index m = 0; m < filled; ++m) {
          const auto c = V.col(start + m);
          v -= c * c.dot(v);
        }
        const double norm = v.norm();
        if (norm < 1e-6) continue;
        V.col(start + filled) = v / norm;
        ++filled;
      }
    }
    start = end;
  }
}

} // namespace

ShiftTable diagonalize_matrix(const std::string &level, const std::vector<HfsState> &basis,
                              const Eigen::MatrixXcd &H, const Eigen::VectorXd &bare_hfs,
                              const Eigen::MatrixXcd *reference) {
  ShiftTable t;
  t.level = level;
  t.basis = basis;
  t.bare_hfs = bare_hfs;
  const auto n = static_cast<Eigen::Index>(basis.size());

  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es(H);
  if (es.info() != Eigen::Success) throw Error(ErrorKind::singular, level, "eigen decomposition failed");
  const Eigen::VectorXd values = es.eigenvalues();
  Eigen::MatrixXcd V = es.eigenvectors();
  const Eigen::MatrixXcd R = reference ? *reference : Eigen::MatrixXcd::Identity(n, n);
  resolve_degenerate(values, V, R);

  const Eigen::MatrixXd O = (R.adjoint() * V).cwiseAbs2();
  struct Pair {
    double overlap;
    Eigen::Index ref, eig;
  };
  std::vector<Pair> pairs;
  pairs.reserve(static_cast<std::size_t>(n * n));
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i < n; ++i) pairs.push_back({O(j, i), j, i});
  std::stable_sort(pairs.begin(), pairs.end(), [](const Pair &a, const Pair &b) {
    if (a.overlap != b.overlap) return a.overlap > b.overlap;
    return a.eig < b.eig;
  });

  std::vector<bool> ref_done(static_cast<std::size_t>(n)), eig_done(static_cast<std::size_t>(n));
  t.eigenvalues.resize(n);
  t.eigenvectors.resize(n, n);
  Eigen::Index assigned = 0;
  for (const auto &p : pairs) {
    if (assigned == n) break;
    if (ref_done[static_cast<std::size_t>(p.ref)] || eig_done[static_cast<std::size_t>(p.eig)]) continue;
    ref_done[static_cast<std::size_t>(p.ref)] = eig_done[static_cast<std::size_t>(p.eig)] = true;
    ++assigned;
    if (p.overlap < 0.5) ++t.ambiguous_labels;
    t.eigenvalues[p.ref] = values[p.eig];
    Eigen::VectorXcd v = V.col(p.eig);
    // fix the phase so the overlap with the reference is real and positive
    const std::complex<double> ov = R.col(p.ref).dot(v);
    if (std::abs(ov) > 0) v *= std::conj(ov) / std::abs(ov);
    t.eigenvectors.col(p.ref) = v;
  }
  return t;
}

ShiftTable diagonalize_interaction(const SpeciesData &species, const std::string &level,
                                   const std::vector<FieldSpec> &fields, const Eigen::MatrixXcd *reference) {
  const Eigen::MatrixXcd Hhfs = hfs_matrix(species, level);
  Eigen::MatrixXcd H = Hhfs;
  for (const auto &f : fields) H += stark_matrix(species, level, f);
  return diagonalize_matrix(level, hfs_basis(species.level(level).J, species.I), H, Hhfs.diagonal().real(),
                            reference);
}

InteractionModel::InteractionModel(const SpeciesData &species, const std::string &level,
                                   const std::vector<FieldSpec> &fields)
    : level_(level), basis_(hfs_basis(species.level(level).J, species.I)), hfs_(hfs_matrix(species, level)) {
  for (const auto &f : fields) fields_.push_back(stark_matrix(species, level, f));
}

ShiftTable InteractionModel::at(const std::vector<double> &scale, const Eigen::MatrixXcd *reference) const {
  if (scale.size() != fields_.size()) throw Error(ErrorKind::domain, "scale", "one factor per field required");
  Eigen::MatrixXcd H = hfs_;
  for (std::size_t i = 0; i < fields_.size(); ++i) H += scale[i] * fields_[i];
  return diagonalize_matrix(level_, basis_, H, hfs_.diagonal().real(), reference);
}

Eigen::MatrixXcd adiabatic_reference(const SpeciesData &species, const std::string &level,
                                     const std::vector<FieldSpec> &fields, int steps) {
  const auto n = static_cast<Eigen::Index>(hfs_basis(species.level(level).J, species.I).size());
  Eigen::MatrixXcd ref = Eigen::MatrixXcd::Identity(n, n);
  for (int k = 1; k <= steps; ++k) {
    auto scaled = fields;
    for (auto &f : scaled) f.intensity *= static_cast<double>(k) / steps;
    ref = diagonalize_interaction(species, level, scaled, &ref).eigenvectors;
  }
  return ref;
}

GroundShift ground_shift(const SpeciesData &species, const std::vector<FieldSpec> &fields) {
  const auto t = diagonalize_interaction(species, species.ground_level, fields);
  GroundShift g;
  g.states = t.basis;
  for (const auto &s : t.basis) g.shifts.push_back(t.shift(s));
  const double ref = g.shifts.front();
  for (double s : g.shifts)
    if (std::abs(s - ref) > 1e-9 * std::max(1.0, std::abs(ref))) g.scalar = false;
  return g;
}

std::vector<TransitionDetuning> transition_detunings(const SpeciesData &species, const ShiftTable &ground,
                                                     const ShiftTable &excited, HalfInt F_ground,
                                                     HalfInt F_ref) {
  const double hfs_ref = hfs_energy(species, excited.level, F_ref);
  std::vector<TransitionDetuning> out;
  for (const auto &g : ground.basis) {
    if (g.F != F_ground) continue;
    const double dg = ground.shift(g);
    for (const auto &e : excited.basis) {
      if ((e.F - g.F).abs() > HalfInt::from_int(1)) continue;
      if ((e.M - g.M).abs() > HalfInt::from_int(1)) continue;
      out.push_back({g, e, excited.total(e) - hfs_ref - dg});
    }
  }
  return out;
}

std::vector<ScanPoint> compensation_scan(const SpeciesData &species, const ScanSetup &setup,
                                         const std::vector<double> &P_c_grid) {
  for (std::size_t i = 1; i < P_c_grid.size(); ++i)
    if (!(P_c_grid[i] > P_c_grid[i - 1]))
      throw Error(ErrorKind::domain, "P_c_grid", "grid must be strictly increasing");
  std::vector<ScanPoint> out;
  out.reserve(P_c_grid.size());
  if (P_c_grid.empty()) return out;
  // labels of the first point come from ramping its fields up from zero
  const auto first = setup.fields(P_c_grid.front());
  const Eigen::MatrixXcd g0 = adiabatic_reference(species, species.ground_level, first);
  const Eigen::MatrixXcd e0 = adiabatic_reference(species, setup.excited_level, first);
  const Eigen::MatrixXcd *gref = &g0;
  const Eigen::MatrixXcd *eref = &e0;
  for (double P : P_c_grid) {
    const auto fields = setup.fields(P);
    ScanPoint pt;
    pt.P_c = P;
    pt.ground = diagonalize_interaction(species, species.ground_level, fields, gref);
    pt.excited = diagonalize_interaction(species, setup.excited_level, fields, eref);
    pt.detunings = transition_detunings(species, pt.ground, pt.excited, setup.F_ground, setup.F_ref);
    out.push_back(std::move(pt));
    gref = &out.back().ground.eigenvectors;
    eref = &out.back().excited.eigenvectors;
  }
  return out;
}

std::string scan_csv(const std::vector<ScanPoint> &scan) {
  std::ostringstream os;
  os << "P_c_uW,F,M,Fprime,Mprime,detuning_MHz\n";
  char buf[160];
  for (const auto &pt : scan) {
    for (const auto &d : pt.detunings) {
      std::snprintf(buf, sizeof buf, "%.6f,%s,%s,%s,%s,%.6f\n", pt.P_c * 1e6, d.ground.F.str().c_str(),
                    d.ground.M.str().c_str(), d.excited.F.str().c_str(), d.excited.M.str().c_str(),
                    d.detuning / constants::two_pi / 1e6);
      os << buf;
    }
  }
  return os.str();
}

std::optional<double> zero_crossing(const std::vector<ScanPoint> &scan, const HfsState &ground,
                                    const HfsState &excited) {
  auto value = [&](const ScanPoint &p) -> std::optional<double> {
    for (const auto &d : p.detunings)
      if (d.ground == ground && d.excited == excited) return d.detuning;
    return std::nullopt;
  };
  for (std::size_t i = 1; i < scan.size(); ++i) {
    const auto a = value(scan[i - 1]);
    const auto b = value(scan[i]);
    if (!a || !b) return std::nullopt;
    if (*a == 0.0) return scan[i - 1].P_c;
    if ((*a < 0) != (*b < 0)) {
      const double t = *a / (*a - *b);
      return scan[i - 1].P_c + t * (scan[i].P_c - scan[i - 1].P_c);
    }
  }
  return std::nullopt;
}

std::optional<TensorMinimum> tensor_minimum(const std::vector<ScanPoint> &scan, HalfInt F_excited) {
  std::optional<TensorMinimum> best;
  for (const auto &p : scan) {
    double lo = INFINITY, hi = -INFINITY;
    for (const auto &s : p.excited.basis) {
      if (s.F != F_excited) continue;
      const double v = p.excited.shift(s);
      lo = std::min(lo, v);
      hi = std::max(hi, v);
    }
    if (!std::isfinite(lo)) return std::nullopt;
    if (best && hi - lo >= best->spread) continue;
    double sum = 0.0;
    int n = 0;
    for (const auto &d : p.detunings)
      if (d.excited.F == F_excited) {
        sum += d.detuning;
        ++n;
      }
    best = TensorMinimum{p.P_c, hi - lo, n ? sum / n : 0.0};
  }
  return best;
}

} // namespace wgm::stark

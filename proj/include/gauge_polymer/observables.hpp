#ifndef GAUGE_POLYMER_OBSERVABLES_HPP
#define GAUGE_POLYMER_OBSERVABLES_HPP

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <set>
#include <string>
#include <vector>

#include "cluster.hpp"
#include "errors.hpp"
#include "lattice.hpp"
#include "loops.hpp"
#include "series.hpp"

namespace gauge_polymer {

/** \brief Weights (in plaquettes) of the two resolved orders: 2(m-1) and 4(m-1)-2. */
inline int first_order_weight(int m) { return 2 * (m - 1); }
inline int second_order_weight(int m) { return 4 * (m - 1) - 2; }

inline double order_term(int m, int weight_of_order, double beta) {
  (void)m;
  return std::exp(-4.0 * beta * weight_of_order);
}

/** \brief 2/(m-1) e^{-8(m-1)beta} + (12(m-1)-8)/(2(m-1)-1) e^{-4(4(m-1)-2)beta}. */
inline double free_energy_two_term(int m, double beta) {
  double a = 2.0 / (m - 1), b = (12.0 * (m - 1) - 8) / (2.0 * (m - 1) - 1);
  return a * std::exp(-8.0 * (m - 1) * beta) + b * std::exp(-4.0 * second_order_weight(m) * beta);
}

/** \brief v_beta = 2 e^{-8(m-1)beta} + 12(m-1) e^{-4(4(m-1)-2)beta}. */
inline double v_beta(int m, double beta) {
  return 2.0 * std::exp(-8.0 * (m - 1) * beta) + 12.0 * (m - 1) * std::exp(-4.0 * second_order_weight(m) * beta);
}

/** \brief Predicted -(1/l) log<W_gamma>: v_beta - 4 (l_c + l_b)/l e^{-4(4(m-1)-2)beta}. */
inline double wilson_prediction(const LoopStats& s, int m, double beta) {
  if (s.length == 0) throw DomainError("empty loop");
  return v_beta(m, beta) -
         4.0 * (s.corners + s.bottlenecks) / s.length * std::exp(-4.0 * second_order_weight(m) * beta);
}

/** \brief V_beta two-term form 4 e^{-8(m-1)beta} + 24(m-1) e^{-4(4(m-1)-2)beta}. */
inline double potential_two_term(int m, double beta) {
  return 4.0 * std::exp(-8.0 * (m - 1) * beta) + 24.0 * (m - 1) * std::exp(-4.0 * second_order_weight(m) * beta);
}

/**
 * \brief Extra second-order vortices hit by a flat surface at m = 3.
 *
 * The vortices d(e1 + e2 + e3) around three perpendicular edges at a vertex have
 * 6(m-2) plaquettes, which equals 4(m-1)-2 only at m = 3. A flat rectangle is
 * hit oddly by 4l - 2 l_c of them; elsewhere the count is 0.
 */
inline long tripod_hits(const LoopStats& s, int m) { return m == 3 ? 4L * s.length - 2L * s.corners : 0L; }

/** \brief wilson_prediction with the tripod vortices included at second order. */
inline double wilson_prediction_with_tripods(const LoopStats& s, int m, double beta) {
  return wilson_prediction(s, m, beta) +
         2.0 * tripod_hits(s, m) / s.length * std::exp(-4.0 * second_order_weight(m) * beta);
}

/** \brief Vortices of the two lowest sizes with nu(q) = 1. */
struct SurfaceCensus {
  long minimal = 0;
  long second = 0;
  long second_edge_pairs = 0;  // second-order vortices of the form d(e + e')
};

inline SurfaceCensus surface_census(const Loop& gamma, const Chain& q, std::size_t budget = kDefaultNodeBudget) {
  int m = gamma.dim();
  if (boundary(q) != gamma.chain()) throw std::invalid_argument("surface boundary differs from the loop");
  int s1 = first_order_weight(m), s2 = second_order_weight(m);
  std::vector<Cell> cells;
  for (const auto& [c, n] : q.terms()) cells.push_back(c);
  if (cells.empty()) return {};
  LatticeBox win = grow(bounding_box(cells, m), s2 + 2);
  PlaquetteIndex idx(win);
  VortexEnumerator en(idx, budget);
  std::vector<std::uint8_t> odd(idx.plaquette_slots(), 0);
  for (const auto& [c, n] : q.terms())
    if (n % 2) odd[*idx.plaquette_id(c)] = 1;
  std::set<std::vector<std::uint32_t>> seen;
  SurfaceCensus out;
  for (const auto& [c, n] : q.terms()) {
    if (n % 2 == 0) continue;
    en.for_each_containing(*idx.plaquette_id(c), s2, [&](const std::vector<std::uint32_t>& v) {
      if (!seen.insert(v).second) return;
      int parity = 0;
      for (std::uint32_t p : v) parity ^= odd[p];
      if (!parity) return;
      if (static_cast<int>(v.size()) == s1) ++out.minimal;
      if (static_cast<int>(v.size()) != s2) return;
      ++out.second;
      std::vector<Cell> vc;
      for (std::uint32_t p : v) vc.push_back(idx.plaquette(p));
      if (classify(Vortex(vc), m).kind == VortexClass::Kind::kEdgePair) ++out.second_edge_pairs;
    });
  }
  return out;
}

struct PotentialEstimate {
  int R = 0;
  int T = 0;  // finite-T estimates only
  std::string method;
  double value = 0;
  double envelope = 0;
};

/**
 * \brief Bound on the part of a Wilson cluster sum left out by the truncation.
 *
 * An omitted cluster with V(q) = 1 contains a plaquette of q and either has
 * weight above kmax or more than nmax members, hence weight at least
 * 2(m-1)(nmax+1); tail_bound covers each case per plaquette.
 */
inline double wilson_envelope(const TruncationParams& p, long surface_plaquettes) {
  if (!p.rigorous()) return std::numeric_limits<double>::infinity();
  double per = tail_bound(p, p.cutoff() + 1);
  int crowded = first_order_weight(p.dim) * (p.nmax + 1);
  if (crowded <= p.cutoff()) per += tail_bound(p, crowded);
  return 2.0 * static_cast<double>(surface_plaquettes) * per;
}

/** \brief The same bound for the free energy per plaquette (each term carries 1/|V|). */
inline double free_energy_envelope(const TruncationParams& p) {
  if (!p.rigorous()) return std::numeric_limits<double>::infinity();
  double env = tail_bound(p, p.cutoff() + 1) / (p.cutoff() + 1);
  int crowded = first_order_weight(p.dim) * (p.nmax + 1);
  if (crowded <= p.cutoff()) env += tail_bound(p, crowded) / crowded;
  return env;
}

/** \brief Rectangle gamma_{R,T}: R along axis 0, T along axis 1, at the origin. */
inline Loop potential_loop(int m, int R, int T) { return rect_loop(m, R, T, 0, 1); }

/** \brief -log<W_{R,T}> truncated, as an exact series. */
inline WeightSeries rectangle_series(int m, int R, int T, const TruncationParams& p) {
  Loop g = potential_loop(m, R, T);
  return wilson_log_series(g.chain(), flat_surface(g), m, p.cutoff(), p.nmax, p.node_budget);
}

inline PotentialEstimate quark_potential_finite_T(int R, int T, const TruncationParams& p) {
  if (R < 1 || T < 1) throw DomainError("R and T must be positive");
  PotentialEstimate e;
  e.R = R;
  e.T = T;
  e.method = "finite-T";
  e.value = rectangle_series(p.dim, R, T, p).evaluate(p.beta) / T;
  e.envelope = wilson_envelope(p, static_cast<long>(R) * T) / T;
  return e;
}

/** \brief Least-squares fit y = a + b/T. */
struct InverseTFit {
  double a = 0, b = 0;
  double max_residual = 0;
};

inline InverseTFit fit_inverse_T(const std::vector<std::pair<int, double>>& points) {
  if (points.size() < 2) throw DomainError("need at least two points for the 1/T fit");
  double n = static_cast<double>(points.size()), sx = 0, sy = 0, sxx = 0, sxy = 0;
  for (const auto& [T, y] : points) {
    double x = 1.0 / T;
    sx += x, sy += y, sxx += x * x, sxy += x * y;
  }
  InverseTFit f;
  f.b = (n * sxy - sx * sy) / (n * sxx - sx * sx);
  f.a = (sy - f.b * sx) / n;
  for (const auto& [T, y] : points) f.max_residual = std::max(f.max_residual, std::fabs(y - f.a - f.b / T));
  return f;
}

/** \brief Intercept of the 1/T fit over finite-T values for T in [t_min, t_max]. */
inline PotentialEstimate quark_potential_extrapolated(int R, int t_min, int t_max, const TruncationParams& p,
                                                      InverseTFit* fit_out = nullptr,
                                                      std::vector<PotentialEstimate>* points_out = nullptr) {
  std::vector<std::pair<int, double>> pts;
  double env = 0;
  for (int T = t_min; T <= t_max; ++T) {
    PotentialEstimate e = quark_potential_finite_T(R, T, p);
    pts.emplace_back(T, e.value);
    env = std::max(env, e.envelope);
    if (points_out) points_out->push_back(e);
  }
  InverseTFit fit = fit_inverse_T(pts);
  if (fit_out) *fit_out = fit;
  PotentialEstimate e;
  e.R = R;
  e.method = "extrapolated";
  e.value = fit.a;
  // the intercept is a fixed linear combination of the inputs; bound it by its l1 norm
  double n = static_cast<double>(pts.size()), sx = 0, sxx = 0;
  for (const auto& [T, y] : pts) sx += 1.0 / T, sxx += 1.0 / (double(T) * T);
  double l1 = 0;
  for (const auto& [T, y] : pts) l1 += std::fabs((sxx - sx / T) / (n * sxx - sx * sx));
  e.envelope = l1 * env + fit.max_residual;
  return e;
}

/**
 * \brief Per-unit-length cluster sums along a bi-infinite line.
 *
 * The line runs along axis 1 through the origin. With R = 0 the surface is the
 * half-plane x_0 >= 0 in the (0,1) plane; with R >= 1 it is the strip
 * 0 <= x_0 < R bounded by a second line at x_0 = R. Both sums cover clusters
 * with V(q) = 1 weighted 2 Psi, one per translation orbit along the line.
 */
class LineSums {
 public:
  LineSums(int m, int R, int kmax, int nmax, std::size_t budget = kDefaultNodeBudget)
      : m_(m), R_(R), kmax_(kmax), engine_(make_window(m, R, kmax), kmax, nmax, budget) {
    if (R < 0) throw DomainError("R must be non-negative");
    const PlaquetteIndex& idx = engine_.index();
    odd_.assign(idx.plaquette_slots(), 0);
    const LatticeBox& win = idx.box();
    for (int x = 0; x <= surface_x_max(); ++x)
      for (int t = win.lower()[1]; t < win.upper()[1]; ++t) odd_[*idx.plaquette_id(surface_plaquette(x, t))] = 1;
  }

  int R() const { return R_; }
  ClusterEngine& engine() { return engine_; }

  /** \brief Sum over the orbit representatives whose lowest axis-1 coordinate is 0. */
  WeightSeries orbit_series() {
    WeightSeries out;
    engine_.for_each_cluster(seeds(0, kmax_), [&](const Cluster& c) {
      if (min_t(c) != 0 || !engine_.cluster_value(c, odd_)) return;
      out.add(c.weight, c.coefficient() * Rational(2));
    });
    return out;
  }

  /**
   * \brief The same sum rooted at the edge e0 from the origin along axis 1:
   * clusters with e0 in E_V, each weighted 2 Psi / |E_V on the line|. E_V is
   * the support of the sum of the canonical primitives of the odd members.
   * Half-plane only.
   */
  WeightSeries rooted_series() {
    if (R_ != 0) throw DomainError("rooted line sum uses the half-plane");
    WeightSeries out;
    const Cell e0{Point{}, axis_bit(1), 1};
    engine_.for_each_cluster(seeds(-kmax_, kmax_), [&](const Cluster& c) {
      std::set<Cell> e_v;
      for (const auto& [id, n] : c.members) {
        if (n % 2 == 0) continue;
        for (const Cell& e : primitive(id)) {
          auto [it, fresh] = e_v.insert(e);
          if (!fresh) e_v.erase(it);
        }
      }
      if (!e_v.count(e0)) return;
      int on_line = 0;
      for (const Cell& e : e_v) on_line += on_line_edge(e);
      if (on_line % 2 != engine_.cluster_value(c, odd_))
        throw std::logic_error("primitive disagrees with the surface pairing");
      if (on_line % 2 == 0) return;
      out.add(c.weight, c.coefficient() * Rational(2, on_line));
    });
    return out;
  }

  /**
   * \brief For each vortex with nu(q) = 1 through the surface plaquettes at
   * t = 0: the sum over its translates along the line of 1(e0 in E) / |E on the
   * line|, each translate solved afresh. Every entry should be exactly 1.
   */
  std::vector<Rational> partition_of_unity(int max_size) {
    std::vector<Rational> out;
    const Cell e0{Point{}, axis_bit(1), 1};
    for (int v : seeds(0, 0)) {
      const VortexRecord& rec = engine_.vortex(v);
      if (rec.size > max_size) continue;
      std::vector<Cell> cells;
      for (std::uint32_t p : rec.plaquettes) cells.push_back(engine_.index().plaquette(p));
      Rational total(0);
      for (int s = -kmax_ - 1; s <= kmax_ + 1; ++s) {
        std::vector<Cell> moved = cells;
        for (Cell& c : moved) c.base[1] += s;
        std::vector<Cell> e = primitive_of(moved);
        int on_line = 0;
        bool has_root = false;
        for (const Cell& f : e) on_line += on_line_edge(f), has_root |= f == e0;
        if (has_root) total += Rational(1, on_line);
      }
      out.push_back(total);
    }
    return out;
  }

 private:
  static LatticeBox make_window(int m, int R, int kmax) {
    int margin = required_margin(kmax);
    Point lo{}, hi{};
    for (int i = 0; i < m; ++i) lo[i] = -kmax - margin, hi[i] = kmax + margin;
    lo[1] = -2 * kmax - margin;
    hi[1] = 2 * kmax + margin;
    hi[0] = (R == 0 ? 3 * kmax + 5 : R + kmax) + margin;
    return LatticeBox(m, lo, hi);
  }

  // the half-plane is cut off well past the reach of any cluster seeded near the line
  int surface_x_max() const { return R_ == 0 ? 2 * kmax_ + 4 : R_ - 1; }

  static Cell surface_plaquette(int x, int t) {
    Cell p{Point{}, static_cast<AxisSet>(axis_bit(0) | axis_bit(1)), 1};
    p.base[0] = x;
    p.base[1] = t;
    return p;
  }

  bool on_line_edge(const Cell& e) const {
    if (e.axes != axis_bit(1)) return false;
    for (int i = 0; i < m_; ++i) {
      if (i == 1 || e.base[i] == 0) continue;
      if (i == 0 && R_ > 0 && e.base[0] == R_) continue;
      return false;
    }
    return true;
  }

  /**
   * \brief Vortices with nu(q) = 1 through surface plaquettes with axis-1
   * coordinate in [t_lo, t_hi] and within kmax of the line.
   */
  std::vector<int> seeds(int t_lo, int t_hi) {
    const PlaquetteIndex& idx = engine_.index();
    int x_hi = R_ == 0 ? kmax_ : R_ - 1;
    std::vector<int> out;
    for (int x = 0; x <= x_hi; ++x)
      for (int t = t_lo; t <= t_hi; ++t)
        for (int v : engine_.vortices_containing(*idx.plaquette_id(surface_plaquette(x, t)), kmax_)) {
          int parity = 0;
          for (std::uint32_t y : engine_.vortex(v).plaquettes) parity ^= odd_[y];
          if (parity) out.push_back(v);
        }
    std::sort(out.begin(), out.end());
    out.erase(std::unique(out.begin(), out.end()), out.end());
    return out;
  }

  int min_t(const Cluster& c) const {
    int t = std::numeric_limits<int>::max();
    for (const auto& [id, n] : c.members)
      for (std::uint32_t p : engine_.vortex(id).plaquettes) t = std::min(t, engine_.index().plaquette(p).base[1]);
    return t;
  }

  /** \brief Canonical primitive: solved on the bounding box moved to the origin, then moved back. */
  std::vector<Cell> primitive_of(std::vector<Cell> cells) const {
    LatticeBox bb = bounding_box(cells, m_);
    Point shift = bb.lower(), hi{};
    for (int i = 0; i < m_; ++i) hi[i] = bb.upper()[i] - shift[i];
    for (Cell& c : cells)
      for (int i = 0; i < m_; ++i) c.base[i] -= shift[i];
    Form sigma = poincare_solve(form_from_cells(2, cells), LatticeBox(m_, Point{}, hi), PoincareBoundary::kVanishing);
    std::vector<Cell> out = sigma.support();
    for (Cell& c : out)
      for (int i = 0; i < m_; ++i) c.base[i] += shift[i];
    return out;
  }

  const std::vector<Cell>& primitive(int id) {
    auto it = primitives_.find(id);
    if (it != primitives_.end()) return it->second;
    std::vector<Cell> cells;
    for (std::uint32_t p : engine_.vortex(id).plaquettes) cells.push_back(engine_.index().plaquette(p));
    return primitives_.emplace(id, primitive_of(std::move(cells))).first->second;
  }

  int m_, R_, kmax_;
  ClusterEngine engine_;
  std::vector<std::uint8_t> odd_;
  std::map<int, std::vector<Cell>> primitives_;
};

/**
 * \brief V_beta(R) from the line sums: clusters lighter than R see one line at a
 * time (twice the half-plane value), heavier ones the full strip.
 */
inline WeightSeries potential_line_series(int R, const TruncationParams& p, WeightSeries* half_out = nullptr) {
  if (R < 2) throw DomainError("R must be at least 2");
  LineSums half(p.dim, 0, p.cutoff(), p.nmax, p.node_budget);
  WeightSeries h = half.orbit_series();
  if (half_out) *half_out = h;
  WeightSeries out = h.truncated(R - 1).scaled(Rational(2));
  if (R <= p.cutoff()) {
    LineSums strip(p.dim, R, p.cutoff(), p.nmax, p.node_budget);
    WeightSeries s = strip.orbit_series();
    out += s - s.truncated(R - 1);
  }
  return out;
}

inline PotentialEstimate quark_potential_line_sum(int R, const TruncationParams& p) {
  PotentialEstimate e;
  e.R = R;
  e.method = "line-sum";
  e.value = potential_line_series(R, p).evaluate(p.beta);
  e.envelope = wilson_envelope(p, R);
  return e;
}

/** \brief V_beta as R -> infinity at fixed cutoff: twice the half-plane line sum. */
inline PotentialEstimate quark_potential_line_limit(const TruncationParams& p) {
  LineSums half(p.dim, 0, p.cutoff(), p.nmax, p.node_budget);
  PotentialEstimate e;
  e.method = "line-limit";
  e.value = 2 * half.orbit_series().evaluate(p.beta);
  // omitted clusters meet the surface within distance kmax of a line
  e.envelope = 2 * wilson_envelope(p, p.cutoff() + 1);
  return e;
}

/** \brief -log<W_{rn, tn}> / (rn + tn), with its truncation envelope. */
inline PotentialEstimate perimeter_ratio(int r, int t, int n, const TruncationParams& p) {
  int R = r * n, T = t * n;
  PotentialEstimate e;
  e.R = R;
  e.T = T;
  e.method = "perimeter";
  e.value = rectangle_series(p.dim, R, T, p).evaluate(p.beta) / (R + T);
  e.envelope = wilson_envelope(p, static_cast<long>(R) * T) / (R + T);
  return e;
}

}  // namespace gauge_polymer

#endif  // GAUGE_POLYMER_OBSERVABLES_HPP

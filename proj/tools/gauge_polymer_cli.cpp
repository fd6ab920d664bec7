#include <cmath>
#include <fstream>
#include <iostream>
#include <memory>
#include <optional>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "json.hpp"

#include "gauge_polymer/cluster.hpp"
#include "gauge_polymer/loops.hpp"
#include "gauge_polymer/observables.hpp"
#include "gauge_polymer/oracle.hpp"
#include "gauge_polymer/verify.hpp"

using namespace gauge_polymer;
using Json = nlohmann::ordered_json;

namespace {

constexpr int kSchemaVersion = 1;

enum ExitCode { kOk = 0, kUsage = 1, kDomain = 2, kBudget = 3, kVerifyFailed = 4 };

struct RunConfig {
  int m = 3;
  std::string beta = "2.0";
  std::string loop = "rect:2,2";
  int kmax = 0;
  int nmax = 6;
  std::optional<double> beta_star;
  std::optional<int> window;
  std::uint64_t seed = 1;
  std::string format = "json";
  std::string out;
  // subcommand specific
  int R = 2;
  int tmax = 12;
  int size_cap = 0;
  std::uint64_t sweeps = 100000;
  std::size_t budget = kDefaultNodeBudget;
  std::vector<int> criteria;
  std::string fault;

  Json echo(const std::string& command) const {
    Json j;
    j["command"] = command;
    j["m"] = m;
    j["beta"] = beta;
    if (command == "wilson" || command == "mc") j["loop"] = loop;
    j["kmax"] = kmax > 0 ? kmax : default_kmax(m);
    j["nmax"] = nmax;
    j["beta_star"] = beta_star ? Json(*beta_star) : Json(nullptr);
    j["window"] = window ? Json(*window) : Json(nullptr);
    if (command == "mc") {
      j["seed"] = seed;
      j["sweeps"] = sweeps;
    }
    if (command == "potential") {
      j["R"] = R;
      j["tmax"] = tmax;
    }
    return j;
  }

  TruncationParams params(double b) const {
    TruncationParams p;
    p.dim = m;
    p.beta = b;
    p.kmax = kmax;
    p.nmax = nmax;
    p.beta_star = beta_star;
    p.node_budget = budget;
    return p;
  }
};

/** \brief A single value, or start:step:end inclusive. */
std::vector<double> parse_beta_grid(const std::string& spec) {
  std::vector<double> parts;
  std::stringstream ss(spec);
  for (std::string tok; std::getline(ss, tok, ':');) {
    std::size_t used = 0;
    double v = std::stod(tok, &used);
    if (used != tok.size()) throw CLI::ValidationError("--beta", "bad number '" + tok + "'");
    parts.push_back(v);
  }
  if (parts.size() == 1) return parts;
  if (parts.size() != 3 || parts[1] <= 0 || parts[2] < parts[0])
    throw CLI::ValidationError("--beta", "expected a value or start:step:end with step > 0");
  long n = std::lround((parts[2] - parts[0]) / parts[1]);
  std::vector<double> out;
  for (long i = 0; i <= n; ++i) out.push_back(parts[0] + i * parts[1]);
  return out;
}

Json number_or_null(double v) { return std::isfinite(v) ? Json(v) : Json(nullptr); }

class Emitter {
 public:
  Emitter(const RunConfig& cfg, std::string command) : cfg_(cfg), command_(std::move(command)) {
    if (!cfg.out.empty()) {
      file_ = std::make_unique<std::ofstream>(cfg.out);
      if (!*file_) throw CLI::ValidationError("--out", "cannot open " + cfg.out);
    }
  }

  void emit(Json body) {
    Json rec;
    rec["schema"] = kSchemaVersion;
    rec["observable"] = body.contains("observable") ? body["observable"] : Json(command_);
    body.erase("observable");
    for (auto& [k, v] : body.items()) rec[k] = v;
    rec["config"] = cfg_.echo(command_);
    records_.push_back(std::move(rec));
  }

  void flush() {
    std::ostream& os = file_ ? *file_ : std::cout;
    if (cfg_.format == "json") {
      for (const Json& r : records_) os << r.dump() << '\n';
    } else {
      // columns: union of the scalar fields in first-seen order
      std::vector<std::string> cols;
      std::set<std::string> seen;
      for (const Json& r : records_)
        for (auto& [k, v] : r.items())
          if (!v.is_structured() && seen.insert(k).second) cols.push_back(k);
      for (std::size_t i = 0; i < cols.size(); ++i) os << (i ? "," : "") << cols[i];
      os << '\n';
      for (const Json& r : records_) {
        for (std::size_t i = 0; i < cols.size(); ++i) {
          if (i) os << ',';
          if (!r.contains(cols[i]) || r[cols[i]].is_null()) continue;
          const Json& v = r[cols[i]];
          if (v.is_string()) {
            std::string s = v.get<std::string>();
            bool quote = s.find_first_of(",\"\n") != std::string::npos;
            if (quote) {
              std::string q;
              for (char c : s) q += c == '"' ? std::string("\"\"") : std::string(1, c);
              os << '"' << q << '"';
            } else {
              os << s;
            }
          } else {
            os << v.dump();
          }
        }
        os << '\n';
      }
    }
    os.flush();
  }

 private:
  const RunConfig& cfg_;
  std::string command_;
  std::unique_ptr<std::ofstream> file_;
  std::vector<Json> records_;
};

void require_dim(int m) {
  if (m < 3 || m > kMaxDim) throw DomainError("m must be in [3, " + std::to_string(kMaxDim) + "]");
}

int cmd_free_energy(const RunConfig& cfg) {
  require_dim(cfg.m);
  Emitter out(cfg, "free-energy");
  TruncationParams base = cfg.params(0);
  WeightSeries s = log_partition_series(cfg.m, base.cutoff(), base.nmax, base.node_budget);
  for (double b : parse_beta_grid(cfg.beta)) {
    TruncationParams p = cfg.params(b);
    Json r;
    r["beta"] = b;
    r["value"] = s.evaluate(b);
    r["two_term"] = free_energy_two_term(cfg.m, b);
    r["tail_envelope"] = number_or_null(free_energy_envelope(p));
    r["rigorous"] = p.rigorous();
    if (!p.rigorous()) r["warning"] = "beta or beta_star outside (beta0, beta): no rigorous tail bound";
    out.emit(r);
  }
  out.flush();
  return kOk;
}

struct LoopSetup {
  Loop loop;
  Chain surface;
  std::optional<LatticeBox> window;
};

LoopSetup setup_loop(const RunConfig& cfg) {
  Loop g = parse_loop(cfg.loop, cfg.m);
  std::vector<Cell> edges = g.edges();
  if (edges.empty()) throw DomainError("empty loop");
  Chain q = g.rect() ? flat_surface(g) : solve_surface(g, bounding_box(edges, cfg.m));
  std::optional<LatticeBox> window;
  if (cfg.window) {
    std::vector<Cell> cells = edges;
    for (const auto& [c, n] : q.terms()) cells.push_back(c);
    window = grow(bounding_box(cells, cfg.m), *cfg.window);
  }
  return {std::move(g), std::move(q), window};
}

int cmd_wilson(const RunConfig& cfg) {
  require_dim(cfg.m);
  Emitter out(cfg, "wilson");
  TruncationParams base = cfg.params(0);
  LoopSetup ls = setup_loop(cfg);
  LoopStats st = loop_stats(ls.loop);
  WeightSeries s = wilson_log_series(ls.loop.chain(), ls.surface, cfg.m, base.cutoff(), base.nmax, base.node_budget,
                                     ls.window);
  for (double b : parse_beta_grid(cfg.beta)) {
    TruncationParams p = cfg.params(b);
    double per_edge = s.evaluate(b) / st.length;
    double pred = wilson_prediction(st, cfg.m, b);
    Json r;
    r["beta"] = b;
    r["minus_log_W_over_l"] = per_edge;
    r["prediction"] = pred;
    r["residual"] = per_edge - pred;
    r["prediction_with_tripods"] = wilson_prediction_with_tripods(st, cfg.m, b);
    r["envelope"] = number_or_null(wilson_envelope(p, static_cast<long>(ls.surface.size())) / st.length);
    r["l"] = st.length;
    r["lc"] = st.corners;
    r["lb"] = st.bottlenecks;
    r["rigorous"] = p.rigorous();
    out.emit(r);
  }
  out.flush();
  return kOk;
}

int cmd_potential(const RunConfig& cfg) {
  require_dim(cfg.m);
  if (cfg.tmax < 2) throw DomainError("tmax must be at least 2");
  Emitter out(cfg, "potential");
  TruncationParams base = cfg.params(0);
  int t_min = std::max(1, cfg.tmax / 2);
  std::vector<std::pair<int, WeightSeries>> rects;
  for (int T = t_min; T <= cfg.tmax; ++T) rects.emplace_back(T, rectangle_series(cfg.m, cfg.R, T, base));
  WeightSeries line = potential_line_series(cfg.R, base);
  for (double b : parse_beta_grid(cfg.beta)) {
    TruncationParams p = cfg.params(b);
    std::vector<std::pair<int, double>> pts;
    double env_max = 0;
    for (const auto& [T, s] : rects) {
      double v = s.evaluate(b) / T, env = wilson_envelope(p, static_cast<long>(cfg.R) * T) / T;
      pts.emplace_back(T, v);
      env_max = std::max(env_max, env);
      out.emit({{"observable", "potential"}, {"method", "finite-T"}, {"beta", b}, {"R", cfg.R}, {"T", T},
                {"value", v}, {"envelope", number_or_null(env)}});
    }
    InverseTFit fit = fit_inverse_T(pts);
    double n = double(pts.size()), sx = 0, sxx = 0, l1 = 0;
    for (const auto& [T, y] : pts) sx += 1.0 / T, sxx += 1.0 / (double(T) * T);
    for (const auto& [T, y] : pts) l1 += std::fabs((sxx - sx / T) / (n * sxx - sx * sx));
    out.emit({{"observable", "potential"}, {"method", "extrapolated"}, {"beta", b}, {"R", cfg.R},
              {"value", fit.a}, {"envelope", number_or_null(l1 * env_max + fit.max_residual)}, {"c_hat", std::fabs(fit.b)}});
    out.emit({{"observable", "potential"}, {"method", "line-sum"}, {"beta", b}, {"R", cfg.R},
              {"value", line.evaluate(b)}, {"envelope", number_or_null(wilson_envelope(p, cfg.R))}});
    out.emit({{"observable", "potential"}, {"method", "series"}, {"beta", b}, {"R", cfg.R},
              {"value", potential_two_term(cfg.m, b)}, {"envelope", nullptr}});
  }
  out.flush();
  return kOk;
}

int cmd_enum_vortices(const RunConfig& cfg) {
  require_dim(cfg.m);
  int cap = cfg.size_cap > 0 ? cfg.size_cap : second_order_weight(cfg.m);
  int half = cfg.window ? *cfg.window : cap + 1;
  LatticeBox box = LatticeBox::centered(cfg.m, half);
  PlaquetteIndex idx(box);
  VortexEnumerator en(idx, cfg.budget, true);
  Cell root{Point{}, static_cast<AxisSet>(axis_bit(0) | axis_bit(1)), 1};
  std::vector<std::vector<std::uint32_t>> found;
  en.for_each_containing(*idx.plaquette_id(root), cap, [&](const std::vector<std::uint32_t>& v) { found.push_back(v); });
  std::vector<Vortex> vortices;
  for (const auto& v : found) {
    std::vector<Cell> cells;
    for (std::uint32_t p : v) cells.push_back(idx.plaquette(p));
    vortices.emplace_back(std::move(cells));
  }
  std::sort(vortices.begin(), vortices.end(), [](const Vortex& a, const Vortex& b) {
    return a.size() != b.size() ? a.size() < b.size() : a < b;
  });
  Emitter out(cfg, "enum-vortices");
  for (const Vortex& v : vortices) {
    VortexClass c = classify(v, cfg.m);
    const char* kind = c.kind == VortexClass::Kind::kMinimal    ? "minimal"
                       : c.kind == VortexClass::Kind::kEdgePair ? (c.parallel ? "edge-pair-parallel" : "edge-pair")
                                                                : "other";
    Json cells = Json::array();
    for (const Cell& p : v.plaquettes()) cells.push_back(to_string(p, cfg.m));
    out.emit({{"observable", "vortex"}, {"size", v.size()}, {"kind", kind}, {"plaquettes", cells}});
  }
  out.flush();
  return kOk;
}

int cmd_verify(const RunConfig& cfg) {
  VerifyOptions opts;
  opts.node_budget = cfg.budget;
  opts.mc_seed = cfg.seed == 1 ? opts.mc_seed : cfg.seed;
  if (cfg.fault == "census-sign")
    opts.fault = Fault::kCensusSign;
  else if (!cfg.fault.empty())
    throw CLI::ValidationError("--inject-fault", "unknown fault '" + cfg.fault + "'");
  std::vector<int> ids = cfg.criteria;
  if (ids.empty())
    for (const Criterion& c : acceptance_criteria()) ids.push_back(c.id);
  Emitter out(cfg, "verify");
  bool failed = false;
  for (int id : ids) {
    CriterionResult r = run_criterion(id, opts);
    failed |= !r.passed && !r.skipped;
    Json metrics = Json::object();
    for (const auto& [k, v] : r.metrics) metrics[k] = number_or_null(v);
    out.emit({{"observable", "criterion"}, {"id", r.id}, {"name", r.name},
              {"status", r.skipped ? "skip" : r.passed ? "pass" : "fail"}, {"seconds", r.seconds},
              {"detail", r.detail}, {"metrics", metrics}});
  }
  out.flush();
  return failed ? kVerifyFailed : kOk;
}

int cmd_mc(const RunConfig& cfg) {
  require_dim(cfg.m);
  int side = cfg.window ? *cfg.window : 8;
  if (side < 2) throw DomainError("window must be at least 2 vertices per side");
  Point lo{}, hi{};
  for (int i = 0; i < cfg.m; ++i) lo[i] = -(side - 1) / 2, hi[i] = lo[i] + side - 1;
  LatticeBox box(cfg.m, lo, hi);
  Loop g = parse_loop(cfg.loop, cfg.m);
  for (const Cell& e : g.edges())
    if (!box.contains(e)) throw MarginError("loop does not fit the Monte Carlo box");
  Emitter out(cfg, "mc");
  for (double b : parse_beta_grid(cfg.beta)) {
    McEstimate e = mc_wilson(box, b, g.chain(), cfg.sweeps, cfg.seed);
    out.emit({{"beta", b}, {"mean", e.mean}, {"stderr", e.stderr_}, {"sweeps", e.sweeps}, {"seed", e.seed},
              {"acceptance", e.acceptance}});
  }
  out.flush();
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Cluster expansion for Z_2 lattice gauge theory at low temperature"};
  app.require_subcommand(1);
  RunConfig cfg;

  auto common = [&](CLI::App* sub) {
    sub->add_option("-m,--dim", cfg.m, "lattice dimension")->capture_default_str();
    sub->add_option("-b,--beta", cfg.beta, "beta, or start:step:end")->capture_default_str();
    sub->add_option("--kmax", cfg.kmax, "cluster weight cutoff (default 4(m-1)+2)");
    sub->add_option("--nmax", cfg.nmax, "maximum vortices per cluster")->capture_default_str();
    sub->add_option("--beta-star", cfg.beta_star, "intermediate beta for the tail bound");
    sub->add_option("--window", cfg.window, "window margin / box size (subcommand specific)");
    sub->add_option("--budget", cfg.budget, "search node budget");
    sub->add_option("--format", cfg.format, "json or csv")->check(CLI::IsMember({"json", "csv"}))->capture_default_str();
    sub->add_option("--out", cfg.out, "output file (default stdout)");
  };

  CLI::App* fe = app.add_subcommand("free-energy", "truncated free energy per plaquette");
  common(fe);
  CLI::App* wl = app.add_subcommand("wilson", "-(1/l) log <W> against the perimeter prediction");
  common(wl);
  wl->add_option("-l,--loop", cfg.loop, "rect:R,T[,axes=i-j][,base=...] or edges:...")->capture_default_str();
  CLI::App* pot = app.add_subcommand("potential", "static quark potential");
  common(pot);
  pot->add_option("-R", cfg.R, "separation")->capture_default_str();
  pot->add_option("--tmax", cfg.tmax, "largest T for the finite-T sequence")->capture_default_str();
  CLI::App* ev = app.add_subcommand("enum-vortices", "vortices through the plaquette at the origin");
  common(ev);
  ev->add_option("--size-cap", cfg.size_cap, "largest size (default 4(m-1)-2)");
  CLI::App* ver = app.add_subcommand("verify", "run the acceptance criteria");
  common(ver);
  ver->add_option("--criteria", cfg.criteria, "criterion ids (default all)");
  ver->add_option("--seed", cfg.seed, "Monte Carlo seed");
  ver->add_option("--inject-fault", cfg.fault)->group("");
  CLI::App* mc = app.add_subcommand("mc", "Metropolis estimate of <W>");
  common(mc);
  mc->add_option("-l,--loop", cfg.loop, "loop spec")->capture_default_str();
  mc->add_option("--seed", cfg.seed)->capture_default_str();
  mc->add_option("--sweeps", cfg.sweeps)->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    int rc = app.exit(e);
    return rc == 0 ? kOk : kUsage;
  }

  try {
    if (*fe) return cmd_free_energy(cfg);
    if (*wl) return cmd_wilson(cfg);
    if (*pot) return cmd_potential(cfg);
    if (*ev) return cmd_enum_vortices(cfg);
    if (*ver) return cmd_verify(cfg);
    if (*mc) return cmd_mc(cfg);
  } catch (const CLI::ParseError& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  } catch (const BudgetExceeded& e) {
    std::cerr << "budget: " << e.what() << '\n';
    return kBudget;
  } catch (const MarginError& e) {
    std::cerr << "margin: " << e.what() << '\n';
    return kBudget;
  } catch (const DomainError& e) {
    std::cerr << "domain: " << e.what() << '\n';
    return kDomain;
  } catch (const std::invalid_argument& e) {
    std::cerr << "error: " << e.what() << '\n';
    return kUsage;
  }
  return kUsage;
}

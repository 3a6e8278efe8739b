// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit if any fail.
#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "smf/cli/cli.hpp"
#include "smf/cli/manifest.hpp"
#include "smf/identifiability.hpp"
#include "smf/image.hpp"
#include "smf/matrix.hpp"
#include "smf/matrix_io.hpp"
#include "smf/solver.hpp"
#include "smf/synthetic.hpp"
#include "smf/topics.hpp"

using namespace smf;
namespace fs = std::filesystem;

namespace {

using Clock = std::chrono::steady_clock;

struct Outcome {
  bool pass = false;
  std::string detail;
};

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

double median(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 == 1 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

double max_abs(const DenseMatrix& m) { return m.size() == 0 ? 0.0 : m.cwiseAbs().maxCoeff(); }

bool monotone(const std::vector<double>& trace) {
  for (std::size_t k = 1; k < trace.size(); ++k) {
    if (trace[k] > trace[k - 1] + 1e-9) return false;
  }
  return true;
}

// ---------------------------------------------------------------------------

Outcome pseudoinverse_suite() {
  const auto t0 = Clock::now();
  std::mt19937_64 rng(2024);
  std::uniform_int_distribution<int> dim(1, 30);
  std::normal_distribution<double> g;
  int ok = 0;
  double worst = 0.0;
  for (int trial = 0; trial < 200; ++trial) {
    const Index rows = dim(rng), cols = dim(rng);
    const Index rank = std::uniform_int_distribution<Index>(0, std::min(rows, cols))(rng);
    DenseMatrix a(rows, rank), b(rank, cols);
    for (Index k = 0; k < a.size(); ++k) a.data()[k] = g(rng);
    for (Index k = 0; k < b.size(); ++k) b.data()[k] = g(rng);
    const DenseMatrix m = rank == 0 ? DenseMatrix::Zero(rows, cols) : DenseMatrix(a * b);
    const DenseMatrix p = pseudoinverse(m);
    const double e = std::max({max_abs(m * p * m - m), max_abs(p * m * p - p),
                               max_abs(m * p - (m * p).transpose()),
                               max_abs(p * m - (p * m).transpose())});
    worst = std::max(worst, e);
    if (e < 1e-8) ++ok;
  }
  const double secs = seconds_since(t0);
  return {ok == 200 && secs < 5.0, std::to_string(ok) + "/200 matrices within 1e-8 (worst " +
                                       fmt("%.2e", worst) + "), " + fmt("%.2f", secs) + " s"};
}

// ---------------------------------------------------------------------------

Outcome sampler_oracle() {
  const double step = 0.05;
  Index proposals = 0, retained = 0, single_axis_anchored = 0;
  double worst_sum = 0.0, worst_dev = 0.0;
  bool all_feasible = true;
  for (int inst = 0; inst < 20; ++inst) {
    const bool anchored = inst % 2 == 0;
    const Index R = 2 + inst % 3;
    const Instance x = generate(30, 12, R, anchored, 0.0, Orientation::kWRowsSumToOne, 500 + inst);
    const FactorPair f = x.truth.factors();
    const auto samples = sample_feasible_A(f, 500, 900 + inst, {step, 0.0});
    proposals += 500;
    retained += static_cast<Index>(samples.size());
    const DenseMatrix I = DenseMatrix::Identity(R, R);
    for (const auto& A : samples) {
      worst_sum = std::max(worst_sum, (A.rowwise().sum().array() - 1.0).abs().maxCoeff());
      all_feasible = all_feasible && is_feasible_mixing(f, A, 0.0);
      if (!anchored) continue;
      Index off = 0;
      for (Index i = 0; i < R; ++i) {
        for (Index j = 0; j < R; ++j) off += (i != j && A(i, j) != 0.0) ? 1 : 0;
      }
      if (off <= 1) {
        ++single_axis_anchored;
        worst_dev = std::max(worst_dev, max_abs(A - I));
      }
    }
  }
  const bool pass = proposals == 10000 && worst_sum < 1e-10 && worst_dev < step && all_feasible;
  return {pass, std::to_string(proposals) + " proposals, " + std::to_string(retained) +
                    " retained; max |A1-1| " + fmt("%.1e", worst_sum) + "; anchored single-axis " +
                    std::to_string(single_axis_anchored) + " with max deviation " +
                    fmt("%.1e", worst_dev) + " (step " + fmt("%.2f", step) + ")"};
}

// ---------------------------------------------------------------------------

Outcome uniqueness_round_trip() {
  int unique_ok = 0, unique_total = 0;
  for (Index R : {2, 3, 5}) {
    for (std::uint64_t seed = 0; seed < 100; ++seed) {
      const Orientation o = seed % 3 == 0   ? Orientation::kWRowsSumToOne
                            : seed % 3 == 1 ? Orientation::kHRowsSumToOne
                                            : Orientation::kBoth;
      const Instance inst = generate(30, 20, R, true, 0.0, o, seed);
      ++unique_total;
      if (check_uniqueness(inst.truth.factors(), 0.0).unique) ++unique_ok;
    }
  }

  // Induce I_r1 within I_r2 (W side) or J_r1 within J_r2 (H side).
  std::mt19937_64 rng(77);
  int detected = 0;
  for (int k = 0; k < 100; ++k) {
    const Index R = std::vector<Index>{2, 3, 5}[static_cast<std::size_t>(k % 3)];
    const Instance inst = generate(30, 20, R, true, 0.0, Orientation::kWRowsSumToOne, 1000 + k);
    FactorPair f = inst.truth.factors();
    const Index r1 = std::uniform_int_distribution<Index>(0, R - 1)(rng);
    Index r2 = std::uniform_int_distribution<Index>(0, R - 2)(rng);
    if (r2 >= r1) ++r2;
    const SubsetKind kind = k % 2 == 0 ? SubsetKind::kW : SubsetKind::kH;
    if (kind == SubsetKind::kW) {
      for (Index i = 0; i < f.W.rows(); ++i) {
        if (f.W(i, r2) != 0.0) continue;
        f.W(i, r1) = 0.0;
        const double s = f.W.row(i).sum();
        if (s > 0.0) {
          f.W.row(i) /= s;
        } else {
          f.W(i, r2) = 1.0;
        }
      }
    } else {
      for (Index j = 0; j < f.H.cols(); ++j) {
        if (f.H(r2, j) == 0.0) f.H(r1, j) = 0.0;
      }
    }
    const UniquenessReport rep = check_uniqueness(f, 0.0);
    // Dropping r1's anchor can put r1 inside every other factor, so other
    // pairs may be listed too; each must still have r1 as the subset side.
    const bool listed = std::find(rep.violations.begin(), rep.violations.end(),
                                  SubsetViolation{kind, r1, r2}) != rep.violations.end();
    const bool only_r1 = std::all_of(rep.violations.begin(), rep.violations.end(),
                                     [&](const SubsetViolation& v) { return v.r1 == r1; });
    if (!rep.unique && listed && only_r1) ++detected;
  }
  return {unique_ok == unique_total && detected == 100,
          std::to_string(unique_ok) + "/" + std::to_string(unique_total) +
              " anchored instances unique; " + std::to_string(detected) +
              "/100 induced violations detected with the right pair"};
}

// ---------------------------------------------------------------------------

// Feasibility of A = [[1-a, a], [b, 1-b]] from the four sign conditions.
bool feasible_2x2(const FactorPair& f, double a, double b) {
  if (1.0 - a - b <= 0.0) return false;
  for (Index i = 0; i < f.W.rows(); ++i) {
    if (f.W(i, 0) * (1 - a) + f.W(i, 1) * b < 0.0) return false;
    if (f.W(i, 0) * a + f.W(i, 1) * (1 - b) < 0.0) return false;
  }
  for (Index j = 0; j < f.H.cols(); ++j) {
    if (f.H(0, j) * (1 - b) - f.H(1, j) * a < 0.0) return false;
    if (-f.H(0, j) * b + f.H(1, j) * (1 - a) < 0.0) return false;
  }
  return true;
}

struct GridInterval {
  double lo = 0.0, hi = 0.0;
  bool contiguous = true;
};

// Axis scan over [-20, 20] at resolution 1e-3; the other parameter held at 0.
GridInterval grid_axis(const FactorPair& f, bool along_a) {
  GridInterval g{1e9, -1e9, true};
  bool inside = false, left = false;
  for (int k = -20000; k <= 20000; ++k) {
    const double t = k * 1e-3;
    const bool ok = along_a ? feasible_2x2(f, t, 0.0) : feasible_2x2(f, 0.0, t);
    if (ok) {
      if (left) g.contiguous = false;
      g.lo = std::min(g.lo, t);
      g.hi = std::max(g.hi, t);
      inside = true;
    } else if (inside) {
      left = true;
    }
  }
  return g;
}

Outcome natural_bounds_grid() {
  const double res = 1e-3;
  std::mt19937_64 rng(4);
  std::gamma_distribution<double> gamma(1.0, 1.0);
  auto simplex_row = [&](Index n, double floor) {
    Vector v(n);
    for (Index k = 0; k < n; ++k) v(k) = gamma(rng);
    v /= v.sum();
    return Vector((1.0 - floor * n) * v.array() + floor);
  };

  std::vector<FactorPair> cases;
  DenseMatrix W0(2, 2), H0(2, 2);
  W0 << 0.7, 0.3, 0.4, 0.6;
  H0 << 0.6, 0.4, 0.2, 0.8;
  cases.push_back({W0, H0, Orientation::kBoth});
  for (int k = 0; k < 50; ++k) {
    // Positive W rows keep the lower endpoints inside the scanned range; H rows
    // on the simplex keep the upper endpoints at most 1.
    FactorPair f{DenseMatrix(8, 2), DenseMatrix(2, 10), Orientation::kBoth};
    for (Index i = 0; i < 8; ++i) f.W.row(i) = simplex_row(2, 0.05).transpose();
    for (Index r = 0; r < 2; ++r) f.H.row(r) = simplex_row(10, 0.0).transpose();
    cases.push_back(f);
  }

  int matched = 0;
  double worst = 0.0;
  for (const auto& f : cases) {
    const auto bounds = natural_bounds(f, 0.0);
    const GridInterval ga = grid_axis(f, true);
    const GridInterval gb = grid_axis(f, false);
    const double e = std::max({std::abs(ga.lo - bounds[0].lower), std::abs(ga.hi - bounds[0].upper),
                               std::abs(gb.lo - bounds[1].lower), std::abs(gb.hi - bounds[1].upper)});
    worst = std::max(worst, e);
    if (e <= res && ga.contiguous && gb.contiguous) ++matched;
  }
  const auto wb = natural_bounds(cases.front(), 0.0);
  const bool worked = std::abs(wb[0].lower + 3.0 / 7.0) < 1e-12 && std::abs(wb[0].upper - 0.5) < 1e-12;
  return {matched == 51 && worked,
          std::to_string(matched) + "/51 instances match the grid (worst endpoint gap " +
              fmt("%.1e", worst) + "); worked example [" + fmt("%.6f", wb[0].lower) + ", " +
              fmt("%.6f", wb[0].upper) + "]"};
}

// ---------------------------------------------------------------------------

Outcome recovery() {
  const auto t0 = Clock::now();
  int recovered = 0, monotone_runs = 0;
  double worst = 0.0;
  std::vector<double> errors;
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    const Instance inst = generate(200, 30, 4, true, 0.0, Orientation::kWRowsSumToOne, seed);
    SolverConfig c;
    c.rank = 4;
    c.orientation = Orientation::kWRowsSumToOne;
    c.restarts = 5;
    c.seed = seed;
    const SolveResult r = factorize(inst.X, c);
    const double e = align_and_score(r.factors.H, inst.truth.H_true).error;
    errors.push_back(e);
    worst = std::max(worst, e);
    if (e < 1e-2) ++recovered;
    if (monotone(r.objective_trace)) ++monotone_runs;
  }
  const double secs = seconds_since(t0);
  return {recovered >= 18 && monotone_runs == 20 && secs < 120.0,
          std::to_string(recovered) + "/20 seeds with aligned H error < 1e-2 (median " +
              fmt("%.1e", median(errors)) + ", worst " + fmt("%.1e", worst) + "); monotone " +
              std::to_string(monotone_runs) + "/20; " + fmt("%.1f", secs) + " s"};
}

// ---------------------------------------------------------------------------

Outcome consistency_trend() {
  const std::vector<Index> sizes = {250, 1000, 4000};
  std::vector<double> med_err, med_diag;
  for (Index N : sizes) {
    std::vector<double> err, diag;
    for (std::uint64_t seed = 0; seed < 10; ++seed) {
      const Instance inst = generate(N, 30, 4, true, 0.01, Orientation::kWRowsSumToOne, 100 + seed);
      SolverConfig c;
      c.rank = 4;
      c.orientation = Orientation::kWRowsSumToOne;
      c.init = InitScheme::kAnchorRows;
      c.restarts = 3;
      c.seed = seed;
      // The row-sum and sign penalties add up over the N rows of W while the
      // residual grows like sqrt(N); fixed weights leave a bias that does not
      // shrink, so the weights are held per row at their N = 250 values.
      const double per_row = static_cast<double>(sizes[0]) / static_cast<double>(N);
      c.penalty_sum1 *= per_row;
      c.penalty_nonneg *= per_row;
      c.mode = SolverMode::kProjected;
      const SolveResult r = factorize(inst.X, c);
      err.push_back(align_and_score(r.factors.H, inst.truth.H_true).error);
      diag.push_back(average_consistency_diagnostic(inst.X, r.factors));
    }
    med_err.push_back(median(err));
    med_diag.push_back(median(diag));
  }
  bool non_increasing = true, shrinks = true;
  for (std::size_t k = 1; k < sizes.size(); ++k) {
    non_increasing = non_increasing && med_err[k] <= med_err[k - 1];
    const double ratio = std::sqrt(static_cast<double>(sizes[0]) / static_cast<double>(sizes[k]));
    shrinks = shrinks && med_diag[k] <= 3.0 * med_diag[0] * ratio;
  }
  std::string detail = "median H error";
  for (std::size_t k = 0; k < sizes.size(); ++k) {
    detail += " N=" + std::to_string(sizes[k]) + ":" + fmt("%.2e", med_err[k]);
  }
  detail += "; median diagnostic";
  for (std::size_t k = 0; k < sizes.size(); ++k) detail += " " + fmt("%.2e", med_diag[k]);
  return {non_increasing && shrinks, detail};
}

// ---------------------------------------------------------------------------

Outcome face_pipeline() {
  const auto t0 = Clock::now();
  const FaceSet set = generate_face_set(2400, 10, 0.05, 7);
  std::vector<GrayImage> small;
  small.reserve(set.images.size());
  for (const auto& img : set.images) small.push_back(downsample_2x2(img));
  const DenseMatrix X = images_to_matrix(small);

  DenseMatrix bases_small(10, 81);
  for (Index r = 0; r < 10; ++r) {
    GrayImage b(19, 19);
    for (Index k = 0; k < 361; ++k) b.pixels[static_cast<std::size_t>(k)] = set.bases(r, k);
    const GrayImage d = downsample_2x2(b);
    for (Index k = 0; k < 81; ++k) bases_small(r, k) = d.pixels[static_cast<std::size_t>(k)];
  }
  const double noise_floor = reconstruction_error(X, {set.W_true, bases_small, Orientation::kWRowsSumToOne});

  SolverConfig c;
  c.rank = 10;
  c.orientation = Orientation::kWRowsSumToOne;
  c.init = InitScheme::kAnchorRows;
  c.restarts = 3;
  c.threads = 3;
  const SolveResult r = factorize(X, c);
  const Index params = r.factors.H.size();
  const double err = reconstruction_error(X, r.factors);

  const Retriever retriever(r.factors);
  int hits = 0;
  for (Index i = 0; i < X.rows(); ++i) {
    if (retriever.find(Eigen::RowVectorXd(X.row(i))).index == i) ++hits;
  }
  const double hit_rate = static_cast<double>(hits) / static_cast<double>(X.rows());
  const bool shape_ok = X.rows() == 2400 && X.cols() == 81 && params == 810;
  return {shape_ok && err < 5.0 * noise_floor && hit_rate >= 0.95,
          "X " + std::to_string(X.rows()) + "x" + std::to_string(X.cols()) + ", " +
              std::to_string(params) + " parameters; error " + fmt("%.3e", err) + " vs floor " +
              fmt("%.3e", noise_floor) + " (ratio " + fmt("%.2f", err / noise_floor) +
              "); retrieval " + fmt("%.4f", hit_rate) + "; " + fmt("%.1f", seconds_since(t0)) + " s"};
}

// ---------------------------------------------------------------------------

Outcome topic_pipeline() {
  const auto t0 = Clock::now();
  BlockCorpusOptions opt;
  opt.documents = 5000;
  opt.terms = 360;
  opt.topics = 20;
  const SyntheticCorpus sc = generate_block_corpus(opt, 11);

  SolverConfig c;
  c.rank = 20;
  c.orientation = Orientation::kBoth;
  c.init = InitScheme::kAnchorRows;
  c.restarts = 2;
  c.threads = 2;
  const TopicModel model = fit_topics(sc.corpus, c);
  const DenseMatrix& H = model.factors.H;
  const double row_sum_gap = (H.rowwise().sum().array() - 1.0).abs().maxCoeff();

  const Alignment al = align_and_score(H, sc.H_true);
  const auto top = top_terms(model, 1);
  int anchors_first = 0;
  for (Index r = 0; r < 20; ++r) {
    const auto& best = top[static_cast<std::size_t>(al.permutation[static_cast<std::size_t>(r)])][0];
    if (best.term == sc.corpus.vocabulary[static_cast<std::size_t>(sc.anchor_terms[static_cast<std::size_t>(r)])]) {
      ++anchors_first;
    }
  }
  const auto bounds = natural_bounds(model.factors, 1e-6);
  double max_width = 0.0;
  for (const auto& b : bounds) max_width = std::max(max_width, b.width());
  return {row_sum_gap <= 1e-3 && anchors_first == 20 && max_width < 0.01,
          "max |H row sum - 1| " + fmt("%.1e", row_sum_gap) + "; anchor term first in " +
              std::to_string(anchors_first) + "/20 topics; " + std::to_string(bounds.size()) +
              " bounds, max width " + fmt("%.2e", max_width) + "; H error " + fmt("%.2e", al.error) +
              "; " + fmt("%.1f", seconds_since(t0)) + " s"};
}

// ---------------------------------------------------------------------------

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

Outcome reproducibility() {
  const fs::path dir = fs::temp_directory_path() / "smf_acceptance_replay";
  fs::remove_all(dir);
  fs::create_directories(dir);
  auto p = [&](const std::string& s) { return (dir / s).string(); };

  // Inputs for the application commands.
  const FaceSet faces = generate_face_set(12, 3, 0.02, 3);
  fs::create_directories(dir / "pgm");
  for (std::size_t i = 0; i < faces.images.size(); ++i) {
    write_pgm(dir / "pgm" / ("img" + std::to_string(i) + ".pgm"), faces.images[i]);
  }
  std::ofstream(dir / "docs.txt") << "red green blue\ngreen green yellow\nblue red 12\nyellow blue\n";
  std::ofstream(dir / "stop.txt") << "the\nand\n";

  const std::vector<std::vector<std::string>> commands = {
      {"generate", "--n", "80", "--m", "20", "--rank", "3", "--anchors", "--noise", "0.01", "--out-dir", p("gen")},
      {"factorize", p("gen/X.csv"), "--rank", "3", "--restarts", "3", "--threads", "3", "--out-dir", p("fit")},
      {"factorize", p("gen/X.csv"), "--rank", "3", "--mode", "projected", "--binary", "--out-dir", p("fitp")},
      {"analyze", p("fit/W.csv"), p("fit/H.csv"), "--zero-tol", "1e-6", "--samples", "300", "--out-dir", p("an")},
      {"faces", "ingest", p("pgm"), "--out-dir", p("fi")},
      {"factorize", p("fi/X.csv"), "--rank", "3", "--init", "anchor", "--out-dir", p("ff")},
      {"faces", "reconstruct", "--W", p("ff/W.csv"), "--H", p("ff/H.csv"), "--index", "0", "--index", "5", "--out-dir", p("fr")},
      {"faces", "retrieve", p("pgm/img4.pgm"), "--W", p("ff/W.csv"), "--H", p("ff/H.csv"), "--out-dir", p("fq")},
      {"faces", "error", "--X", p("fi/X.csv"), "--W", p("ff/W.csv"), "--H", p("ff/H.csv"), "--out-dir", p("fe")},
      {"topics", "build", p("docs.txt"), "--stop-words", p("stop.txt"), "--out-dir", p("tb")},
      {"topics", "fit", p("tb/doc_term.csv"), "--vocab", p("tb/vocab.txt"), "--rank", "2", "--out-dir", p("tf")},
      {"topics", "top-terms", "--H", p("tf/H.csv"), "--vocab", p("tb/vocab.txt"), "--k", "2", "--out-dir", p("tt")},
      {"topics", "histogram", "--W", p("tf/W.csv"), "--out-dir", p("th")},
  };

  int identical = 0;
  std::string failures;
  for (std::size_t k = 0; k < commands.size(); ++k) {
    std::ostringstream out, err;
    const auto& cmd = commands[k];
    const std::string out_dir = cmd.back();
    if (cli::run_cli(cmd, out, err) != 0) {
      failures += " [" + cmd[0] + " failed: " + err.str() + "]";
      continue;
    }
    const std::string again = out_dir + "_replay";
    std::ostringstream rout, rerr;
    const int rc = cli::run_cli({"replay", out_dir + "/manifest.json", "--out-dir", again}, rout, rerr);
    bool same = rc == 0;
    const cli::RunManifest m = cli::read_manifest(fs::path(out_dir) / "manifest.json");
    for (const auto& o : m.outputs) {
      same = same && slurp(fs::path(out_dir) / o.path) == slurp(fs::path(again) / o.path);
    }
    if (same && !m.outputs.empty()) {
      ++identical;
    } else {
      failures += " [" + cmd[0] + (cmd.size() > 1 ? " " + cmd[1] : "") + " differs]";
    }
  }
  fs::remove_all(dir);
  return {identical == static_cast<int>(commands.size()),
          std::to_string(identical) + "/" + std::to_string(commands.size()) +
              " commands replayed bitwise-identically" + failures};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"pseudoinverse suite", pseudoinverse_suite},
      {"feasible mixing sampler", sampler_oracle},
      {"uniqueness round trip", uniqueness_round_trip},
      {"natural bounds against grid", natural_bounds_grid},
      {"noiseless recovery", recovery},
      {"consistency trend", consistency_trend},
      {"face pipeline", face_pipeline},
      {"topic pipeline", topic_pipeline},
      {"reproducibility", reproducibility},
  };
  int failed = 0;
  for (std::size_t k = 0; k < criteria.size(); ++k) {
    Outcome o;
    try {
      o = criteria[k].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    if (!o.pass) ++failed;
    std::cout << (o.pass ? "PASS" : "FAIL") << " criterion " << k + 1 << " (" << criteria[k].first
              << "): " << o.detail << std::endl;
  }
  std::cout << (criteria.size() - failed) << "/" << criteria.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}

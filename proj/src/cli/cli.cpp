#include "smf/cli/cli.hpp"

#include <algorithm>
#include <chrono>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <optional>
#include <ostream>

#include <CLI11.hpp>

#include "smf/cli/manifest.hpp"
#include "smf/errors.hpp"
#include "smf/identifiability.hpp"
#include "smf/image.hpp"
#include "smf/matrix_io.hpp"
#include "smf/report.hpp"
#include "smf/solver.hpp"
#include "smf/synthetic.hpp"
#include "smf/topics.hpp"

namespace smf::cli {

namespace fs = std::filesystem;
using Json = nlohmann::ordered_json;

namespace {

std::string num(double v) { return format_double(v); }
std::string num(long long v) { return std::to_string(v); }

std::string absolute(const std::string& p) { return fs::absolute(fs::path(p)).lexically_normal().string(); }

// Bookkeeping shared by every command: resolved arguments, inputs and the
// files written, turned into manifest.json at the end.
class Run {
 public:
  Run(std::string command, const std::string& out_dir)
      : command_(std::move(command)),
        out_dir_(absolute(out_dir)),
        start_(std::chrono::steady_clock::now()) {
    argv_ = split(command_);
  }

  const fs::path& out_dir() const { return out_dir_; }

  void arg(const std::string& flag, const std::string& value) {
    argv_.push_back(flag);
    argv_.push_back(value);
  }
  void flag(const std::string& flag, bool on) {
    if (on) argv_.push_back(flag);
  }
  void positional(const std::string& value) { argv_.push_back(value); }

  std::string input(const std::string& path) {
    const std::string p = absolute(path);
    inputs_.push_back(p);
    return p;
  }

  fs::path output(const std::string& name) {
    fs::create_directories(out_dir_);
    outputs_.push_back(name);
    return out_dir_ / name;
  }

  void write_text(const std::string& name, const std::string& text) {
    std::ofstream out(output(name), std::ios::binary | std::ios::trunc);
    if (!out) throw InvalidInput("cannot write " + (out_dir_ / name).string());
    out << text;
  }

  std::string write_matrix(const std::string& stem, const DenseMatrix& m, bool binary) {
    const std::string name = stem + (binary ? ".bin" : ".csv");
    if (binary) {
      write_binary_matrix(output(name), m);
    } else {
      write_csv_matrix(output(name), m);
    }
    return name;
  }

  void write_json(const std::string& name, const Json& j) { write_text(name, j.dump(2) + "\n"); }

  Json config = Json::object();
  std::uint64_t seed = 0;

  void finish() {
    argv_.push_back("--out-dir");
    argv_.push_back(out_dir_.string());
    RunManifest m;
    m.command = command_;
    m.argv = argv_;
    m.config = config;
    m.seed = seed;
    for (const auto& p : inputs_) m.inputs.push_back({p, sha256_file(p)});
    for (const auto& name : outputs_) m.outputs.push_back({name, sha256_file(out_dir_ / name)});
    m.duration_seconds =
        std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
    fs::create_directories(out_dir_);
    write_manifest(out_dir_ / "manifest.json", m);
  }

 private:
  static std::vector<std::string> split(const std::string& command) {
    std::vector<std::string> words;
    std::string word;
    for (char c : command) {
      if (c == ' ') {
        words.push_back(word);
        word.clear();
      } else {
        word.push_back(c);
      }
    }
    words.push_back(word);
    return words;
  }

  std::string command_;
  fs::path out_dir_;
  std::chrono::steady_clock::time_point start_;
  std::vector<std::string> argv_;
  std::vector<std::string> inputs_;
  std::vector<std::string> outputs_;
};

struct SolverFlags {
  long long rank = 0;
  std::string orientation = "image";
  std::string mode = "penalty";
  std::string init = "uniform";
  std::vector<double> weights{100.0, 10.0};
  long long restarts = 5;
  std::uint64_t seed = 0;
  long long max_iter = 5000;
  double tol = 1e-8;
  std::optional<long long> threads;
  bool free_w = false;
  bool binary = false;
  std::string out_dir = "smf-out";
};

void add_solver_flags(CLI::App* cmd, SolverFlags& f, bool with_orientation) {
  cmd->add_option("--rank", f.rank, "number of factors R")->required();
  if (with_orientation) {
    cmd->add_option("--orientation", f.orientation, "image | topic | both")->capture_default_str();
  }
  cmd->add_option("--mode", f.mode, "penalty | projected")->capture_default_str();
  cmd->add_option("--init", f.init, "uniform | anchor")->capture_default_str();
  cmd->add_option("--weights", f.weights, "row-sum and sign penalty weights")
      ->expected(2)
      ->capture_default_str();
  cmd->add_option("--restarts", f.restarts)->capture_default_str();
  cmd->add_option("--seed", f.seed)->capture_default_str();
  cmd->add_option("--max-iter", f.max_iter)->capture_default_str();
  cmd->add_option("--tol", f.tol, "relative objective change")->capture_default_str();
  cmd->add_option("--threads", f.threads, "parallel restarts (falls back to SMF_THREADS)");
  cmd->add_flag("--free-w", f.free_w, "drop the W penalties when H is stochastic");
  cmd->add_flag("--binary", f.binary, "write matrices in the binary format");
  cmd->add_option("--out-dir", f.out_dir)->capture_default_str();
}

int resolve_threads(const std::optional<long long>& flag) {
  if (flag) return static_cast<int>(*flag);
  if (const char* env = std::getenv("SMF_THREADS"); env != nullptr && *env != '\0') {
    char* end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end == nullptr || *end != '\0' || v < 1) {
      throw InvalidInput(std::string("SMF_THREADS must be a positive integer, got '") + env + "'");
    }
    return static_cast<int>(v);
  }
  return 1;
}

SolverConfig solver_config(const SolverFlags& f, std::optional<Orientation> fixed) {
  SolverConfig c;
  c.rank = f.rank;
  c.orientation = fixed ? *fixed : parse_orientation(f.orientation);
  c.mode = parse_solver_mode(f.mode);
  c.init = parse_init_scheme(f.init);
  c.penalty_sum1 = f.weights.at(0);
  c.penalty_nonneg = f.weights.at(1);
  c.restarts = static_cast<int>(f.restarts);
  c.seed = f.seed;
  c.max_iter = static_cast<int>(f.max_iter);
  c.conv_tol = f.tol;
  c.threads = resolve_threads(f.threads);
  c.penalize_w = !f.free_w;
  validate(c);
  return c;
}

void record_solver_args(Run& run, const SolverFlags& f, const SolverConfig& c, bool with_orientation) {
  run.arg("--rank", num(static_cast<long long>(c.rank)));
  if (with_orientation) run.arg("--orientation", std::string(to_string(c.orientation)));
  run.arg("--mode", std::string(to_string(c.mode)));
  run.arg("--init", std::string(to_string(c.init)));
  run.positional("--weights");
  run.positional(num(c.penalty_sum1));
  run.positional(num(c.penalty_nonneg));
  run.arg("--restarts", num(static_cast<long long>(c.restarts)));
  run.arg("--seed", std::to_string(c.seed));
  run.arg("--max-iter", num(static_cast<long long>(c.max_iter)));
  run.arg("--tol", num(c.conv_tol));
  run.arg("--threads", num(static_cast<long long>(c.threads)));
  run.flag("--free-w", f.free_w);
  run.flag("--binary", f.binary);
  run.config = config_json(c);
  run.config["threads"] = c.threads;
  run.config["binary"] = f.binary;
  run.seed = c.seed;
}

void write_solution(Run& run, const SolveResult& result, const SolverConfig& config, bool binary,
                    std::ostream& out) {
  run.write_matrix("W", result.factors.W, binary);
  run.write_matrix("H", result.factors.H, binary);
  run.write_json("result.json", solve_result_json(result, config));
  out << "objective " << format_double(result.objective) << ", iterations " << result.iterations
      << ", converged " << (result.converged ? "true" : "false") << ", best restart "
      << result.best_restart << "\n";
}

// ---- factorize ----------------------------------------------------------

struct FactorizeFlags {
  std::string input;
  SolverFlags solver;
};

int cmd_factorize(const FactorizeFlags& f, std::ostream& out) {
  Run run("factorize", f.solver.out_dir);
  const SolverConfig config = solver_config(f.solver, std::nullopt);
  run.positional(run.input(f.input));
  record_solver_args(run, f.solver, config, true);

  const DenseMatrix X = read_matrix(f.input);
  const SolveResult result = factorize(X, config);
  write_solution(run, result, config, f.solver.binary, out);
  run.finish();
  return kExitOk;
}

// ---- analyze ------------------------------------------------------------

struct AnalyzeFlags {
  std::string w_path;
  std::string h_path;
  double zero_tol = 1e-9;
  long long samples = 1000;
  std::uint64_t seed = 0;
  double step = 0.05;
  std::string out_dir = "smf-out";
};

int cmd_analyze(const AnalyzeFlags& f, std::ostream& out) {
  Run run("analyze", f.out_dir);
  if (!(f.zero_tol >= 0.0)) throw InvalidInput("--zero-tol must be non-negative");
  if (f.samples < 1) throw InvalidInput("--samples must be at least 1");
  if (!(f.step > 0.0)) throw InvalidInput("--step must be positive");
  run.positional(run.input(f.w_path));
  run.positional(run.input(f.h_path));
  run.arg("--zero-tol", num(f.zero_tol));
  run.arg("--samples", num(f.samples));
  run.arg("--seed", std::to_string(f.seed));
  run.arg("--step", num(f.step));
  run.config = {{"zero_tol", f.zero_tol}, {"samples", f.samples}, {"seed", f.seed}, {"step", f.step}};
  run.seed = f.seed;

  FactorPair factors{read_matrix(f.w_path), read_matrix(f.h_path), Orientation::kWRowsSumToOne};
  if (factors.W.cols() != factors.H.rows()) {
    throw InvalidInput("W has " + std::to_string(factors.W.cols()) + " columns but H has " +
                       std::to_string(factors.H.rows()) + " rows");
  }
  require_finite(factors.W, "W");
  require_finite(factors.H, "H");

  const UniquenessReport report = check_uniqueness(factors, f.zero_tol);
  const std::vector<AxisBound> bounds = natural_bounds(factors, f.zero_tol);
  const OracleSummary oracle = run_bounds_oracle(factors, bounds, f.samples, f.seed,
                                                 SamplerOptions{f.step, f.zero_tol});
  Json j = identifiability_json(report, bounds);
  j["oracle"] = oracle_json(oracle);
  run.write_json("report.json", j);
  run.finish();

  out << "unique " << (report.unique ? "true" : "false") << ", violations "
      << report.violations.size() << ", bounds " << bounds.size() << ", max width "
      << format_double(summarize_widths(bounds).max_width) << "\n";
  return kExitOk;
}

// ---- generate -----------------------------------------------------------

struct GenerateFlags {
  long long n = 200;
  long long m = 30;
  long long rank = 4;
  bool anchors = false;
  double noise = 0.0;
  std::string orientation = "image";
  std::uint64_t seed = 0;
  bool binary = false;
  std::string out_dir = "smf-out";
};

int cmd_generate(const GenerateFlags& f, std::ostream& out) {
  Run run("generate", f.out_dir);
  const Orientation o = parse_orientation(f.orientation);
  run.arg("--n", num(f.n));
  run.arg("--m", num(f.m));
  run.arg("--rank", num(f.rank));
  run.flag("--anchors", f.anchors);
  run.arg("--noise", num(f.noise));
  run.arg("--orientation", std::string(to_string(o)));
  run.arg("--seed", std::to_string(f.seed));
  run.flag("--binary", f.binary);
  run.config = {{"n", f.n},         {"m", f.m},
                {"rank", f.rank},   {"anchors", f.anchors},
                {"noise", f.noise}, {"orientation", std::string(to_string(o))},
                {"seed", f.seed},   {"binary", f.binary}};
  run.seed = f.seed;

  const Instance inst = generate(f.n, f.m, f.rank, f.anchors, f.noise, o, f.seed);
  run.write_matrix("X", inst.X, f.binary);
  run.write_matrix("W_true", inst.truth.W_true, f.binary);
  run.write_matrix("H_true", inst.truth.H_true, f.binary);
  run.finish();
  out << "generated " << inst.X.rows() << "x" << inst.X.cols() << " instance with rank " << f.rank
      << "\n";
  return kExitOk;
}

// ---- faces --------------------------------------------------------------

struct FacesFlags {
  std::string dir;
  bool keep_size = false;
  std::string x_path;
  std::string w_path;
  std::string h_path;
  std::vector<long long> indices;
  std::vector<std::string> queries;
  std::string out_dir = "smf-out";
};

Eigen::RowVectorXd query_pixels(const GrayImage& img, Index expected) {
  GrayImage q = img;
  if (q.width * q.height != expected && q.width == 19 && q.height == 19) q = downsample_2x2(q);
  if (q.width * q.height != expected) {
    throw InvalidInput("query has " + std::to_string(q.width * q.height) + " pixels, model expects " +
                       std::to_string(expected));
  }
  return Eigen::Map<const Eigen::RowVectorXd>(q.pixels.data(), expected);
}

int cmd_faces_ingest(const FacesFlags& f, std::ostream& out) {
  Run run("faces ingest", f.out_dir);
  const std::string dir = absolute(f.dir);
  if (!fs::is_directory(dir)) throw InvalidInput(dir + " is not a directory");
  run.positional(dir);
  run.flag("--keep-size", f.keep_size);
  run.config = {{"keep_size", f.keep_size}};

  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(dir)) {
    if (entry.is_regular_file() && entry.path().extension() == ".pgm") files.push_back(entry.path());
  }
  std::sort(files.begin(), files.end());
  if (files.empty()) throw InvalidInput("no .pgm files in " + dir);

  std::vector<GrayImage> images;
  std::string names;
  for (const auto& p : files) {
    run.input(p.string());
    GrayImage img = read_pgm(p);
    if (!f.keep_size && img.width == 19 && img.height == 19) img = downsample_2x2(img);
    images.push_back(std::move(img));
    names += p.filename().string() + "\n";
  }
  const DenseMatrix X = images_to_matrix(images);
  run.write_matrix("X", X, false);
  run.write_text("images.txt", names);
  run.finish();
  out << "ingested " << X.rows() << " images with " << X.cols() << " pixels each\n";
  return kExitOk;
}

int cmd_faces_reconstruct(const FacesFlags& f, std::ostream& out) {
  Run run("faces reconstruct", f.out_dir);
  run.arg("--W", run.input(f.w_path));
  run.arg("--H", run.input(f.h_path));
  for (long long i : f.indices) run.arg("--index", num(i));
  run.config = {{"indices", f.indices}};

  const DenseMatrix W = read_matrix(f.w_path);
  const DenseMatrix H = read_matrix(f.h_path);
  if (W.cols() != H.rows()) throw InvalidInput("W columns must equal H rows");
  for (long long i : f.indices) {
    if (i < 0 || i >= W.rows()) throw InvalidInput("index " + std::to_string(i) + " out of range");
    const GrayImage img = reconstruct(W.row(i).transpose(), H);
    write_pgm(run.output("reconstruct_" + std::to_string(i) + ".pgm"), img);
  }
  run.finish();
  out << "reconstructed " << f.indices.size() << " images\n";
  return kExitOk;
}

int cmd_faces_retrieve(const FacesFlags& f, std::ostream& out) {
  Run run("faces retrieve", f.out_dir);
  std::vector<std::string> queries;
  for (const auto& q : f.queries) queries.push_back(run.input(q));
  for (const auto& q : queries) run.positional(q);
  run.arg("--W", run.input(f.w_path));
  run.arg("--H", run.input(f.h_path));

  const Retriever retriever(
      FactorPair{read_matrix(f.w_path), read_matrix(f.h_path), Orientation::kWRowsSumToOne});
  const Index pixels = read_matrix(f.h_path).cols();
  std::string csv = "query,index,distance\n";
  for (const auto& q : queries) {
    const RetrievalHit hit = retriever.find(query_pixels(read_pgm(q), pixels));
    csv += fs::path(q).filename().string() + "," + std::to_string(hit.index) + "," +
           format_double(hit.distance) + "\n";
    out << fs::path(q).filename().string() << " -> " << hit.index << "\n";
  }
  run.write_text("retrieval.csv", csv);
  run.finish();
  return kExitOk;
}

int cmd_faces_error(const FacesFlags& f, std::ostream& out) {
  Run run("faces error", f.out_dir);
  run.arg("--X", run.input(f.x_path));
  run.arg("--W", run.input(f.w_path));
  run.arg("--H", run.input(f.h_path));
  const DenseMatrix X = read_matrix(f.x_path);
  const FactorPair factors{read_matrix(f.w_path), read_matrix(f.h_path), Orientation::kWRowsSumToOne};
  const double e = reconstruction_error(X, factors);
  run.write_json("error.json", {{"reconstruction_error", e}, {"rows", X.rows()}, {"cols", X.cols()}});
  run.finish();
  out << "reconstruction error " << format_double(e) << "\n";
  return kExitOk;
}

// ---- topics -------------------------------------------------------------

struct TopicsFlags {
  std::string input;
  std::string stop_words;
  double min_df = 0.005;
  std::string vocab;
  std::string w_path;
  std::string h_path;
  long long k = 5;
  bool binary = false;
  std::string out_dir = "smf-out";
  SolverFlags solver;
};

int cmd_topics_build(const TopicsFlags& f, std::ostream& out) {
  Run run("topics build", f.out_dir);
  run.positional(run.input(f.input));
  CorpusOptions options;
  options.min_doc_fraction = f.min_df;
  if (!f.stop_words.empty()) {
    run.arg("--stop-words", run.input(f.stop_words));
    options.stop_words = read_stop_words(f.stop_words);
  }
  run.arg("--min-df", num(f.min_df));
  run.flag("--binary", f.binary);
  run.config = {{"min_df", f.min_df}, {"stop_words", options.stop_words.size()}, {"binary", f.binary}};

  const Corpus corpus = build_corpus(read_lines(f.input), options);
  run.write_matrix("doc_term", corpus.doc_term, f.binary);
  std::string vocab;
  for (const auto& t : corpus.vocabulary) vocab += t + "\n";
  run.write_text("vocab.txt", vocab);
  std::string ids;
  for (const auto& d : corpus.doc_ids) ids += d + "\n";
  run.write_text("doc_ids.txt", ids);
  run.finish();
  out << "corpus " << corpus.doc_term.rows() << " documents x " << corpus.vocabulary.size()
      << " terms\n";
  return kExitOk;
}

int cmd_topics_fit(const TopicsFlags& f, std::ostream& out) {
  Run run("topics fit", f.solver.out_dir);
  const SolverConfig config = solver_config(f.solver, Orientation::kBoth);
  run.positional(run.input(f.input));
  run.arg("--vocab", run.input(f.vocab));
  record_solver_args(run, f.solver, config, false);

  const Corpus corpus = read_corpus(f.input, f.vocab);
  SolveResult details;
  fit_topics(corpus, config, &details);
  write_solution(run, details, config, f.solver.binary, out);
  run.finish();
  return kExitOk;
}

int cmd_topics_top_terms(const TopicsFlags& f, std::ostream& out) {
  Run run("topics top-terms", f.out_dir);
  run.arg("--H", run.input(f.h_path));
  run.arg("--vocab", run.input(f.vocab));
  run.arg("--k", num(f.k));
  run.config = {{"k", f.k}};

  TopicModel model;
  model.factors.H = read_matrix(f.h_path);
  model.factors.orientation = Orientation::kBoth;
  for (auto& line : read_lines(f.vocab)) {
    if (!line.empty()) model.vocabulary.push_back(std::move(line));
  }
  const auto terms = top_terms(model, f.k);
  run.write_text("top_terms.csv", format_top_terms_csv(terms));
  run.finish();
  for (std::size_t r = 0; r < terms.size(); ++r) {
    out << "topic " << r + 1 << ":";
    for (const auto& t : terms[r]) out << " " << t.term;
    out << "\n";
  }
  return kExitOk;
}

int cmd_topics_histogram(const TopicsFlags& f, std::ostream& out) {
  Run run("topics histogram", f.out_dir);
  run.arg("--W", run.input(f.w_path));
  const auto counts = topic_histogram(read_matrix(f.w_path));
  run.write_text("histogram.csv", format_histogram_csv(counts));
  run.finish();
  for (std::size_t r = 0; r < counts.size(); ++r) out << "topic " << r + 1 << ": " << counts[r] << "\n";
  return kExitOk;
}

// ---- replay -------------------------------------------------------------

struct ReplayFlags {
  std::string manifest;
  std::string out_dir;
};

int cmd_replay(const ReplayFlags& f, std::ostream& out, std::ostream& err) {
  const RunManifest m = read_manifest(f.manifest);
  for (const auto& in : m.inputs) {
    if (!fs::exists(in.path)) throw InvalidInput("input " + in.path + " is missing");
    if (sha256_file(in.path) != in.sha256) throw InvalidInput("input " + in.path + " has changed");
  }
  std::vector<std::string> argv = m.argv;
  auto it = std::find(argv.begin(), argv.end(), "--out-dir");
  if (it == argv.end() || std::next(it) == argv.end()) throw InvalidInput("manifest has no --out-dir");
  if (!f.out_dir.empty()) *std::next(it) = absolute(f.out_dir);
  const fs::path out_dir = *std::next(it);

  const int rc = run_cli(argv, out, err);
  if (rc != kExitOk) return rc;

  bool identical = true;
  for (const auto& o : m.outputs) {
    const bool same = sha256_file(out_dir / o.path) == o.sha256;
    identical = identical && same;
    out << (same ? "identical " : "DIFFERENT ") << o.path << "\n";
  }
  if (!identical) {
    err << "replay produced different outputs\n";
    return kExitNumerical;
  }
  return kExitOk;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Stochastic matrix factorization toolkit", "smf"};
  app.require_subcommand(1);
  app.set_version_flag("--version", kToolVersion);

  FactorizeFlags fact;
  auto* c_fact = app.add_subcommand("factorize", "factor a non-negative matrix X ~ W H");
  c_fact->add_option("input", fact.input, "matrix file (CSV or binary)")->required();
  add_solver_flags(c_fact, fact.solver, true);

  AnalyzeFlags an;
  auto* c_an = app.add_subcommand("analyze", "uniqueness test and natural bounds for W, H");
  c_an->add_option("W", an.w_path)->required();
  c_an->add_option("H", an.h_path)->required();
  c_an->add_option("--zero-tol", an.zero_tol)->capture_default_str();
  c_an->add_option("--samples", an.samples, "sampler proposals")->capture_default_str();
  c_an->add_option("--seed", an.seed)->capture_default_str();
  c_an->add_option("--step", an.step, "sampler step")->capture_default_str();
  c_an->add_option("--out-dir", an.out_dir)->capture_default_str();

  GenerateFlags gen;
  auto* c_gen = app.add_subcommand("generate", "synthetic instance with known factors");
  c_gen->add_option("--n", gen.n)->capture_default_str();
  c_gen->add_option("--m", gen.m)->capture_default_str();
  c_gen->add_option("--rank", gen.rank)->capture_default_str();
  c_gen->add_flag("--anchors", gen.anchors);
  c_gen->add_option("--noise", gen.noise)->capture_default_str();
  c_gen->add_option("--orientation", gen.orientation)->capture_default_str();
  c_gen->add_option("--seed", gen.seed)->capture_default_str();
  c_gen->add_flag("--binary", gen.binary);
  c_gen->add_option("--out-dir", gen.out_dir)->capture_default_str();

  FacesFlags faces;
  auto* c_faces = app.add_subcommand("faces", "gray-scale image pipeline");
  c_faces->require_subcommand(1);
  auto* f_ingest = c_faces->add_subcommand("ingest", "read a directory of PGM files into X");
  f_ingest->add_option("dir", faces.dir)->required();
  f_ingest->add_flag("--keep-size", faces.keep_size, "do not downsample 19x19 images");
  f_ingest->add_option("--out-dir", faces.out_dir)->capture_default_str();
  auto* f_rec = c_faces->add_subcommand("reconstruct", "render rows of W H as images");
  f_rec->add_option("--W", faces.w_path)->required();
  f_rec->add_option("--H", faces.h_path)->required();
  f_rec->add_option("--index", faces.indices)->required();
  f_rec->add_option("--out-dir", faces.out_dir)->capture_default_str();
  auto* f_ret = c_faces->add_subcommand("retrieve", "nearest stored image in weight space");
  f_ret->add_option("queries", faces.queries)->required();
  f_ret->add_option("--W", faces.w_path)->required();
  f_ret->add_option("--H", faces.h_path)->required();
  f_ret->add_option("--out-dir", faces.out_dir)->capture_default_str();
  auto* f_err = c_faces->add_subcommand("error", "mean squared reconstruction error");
  f_err->add_option("--X", faces.x_path)->required();
  f_err->add_option("--W", faces.w_path)->required();
  f_err->add_option("--H", faces.h_path)->required();
  f_err->add_option("--out-dir", faces.out_dir)->capture_default_str();

  TopicsFlags topics;
  auto* c_topics = app.add_subcommand("topics", "bag-of-words topic pipeline");
  c_topics->require_subcommand(1);
  auto* t_build = c_topics->add_subcommand("build", "documents (one per line) to doc-term counts");
  t_build->add_option("corpus", topics.input)->required();
  t_build->add_option("--stop-words", topics.stop_words);
  t_build->add_option("--min-df", topics.min_df, "minimum document fraction")->capture_default_str();
  t_build->add_flag("--binary", topics.binary);
  t_build->add_option("--out-dir", topics.out_dir)->capture_default_str();
  auto* t_fit = c_topics->add_subcommand("fit", "fit topics with W and H rows on the simplex");
  t_fit->add_option("doc_term", topics.input)->required();
  t_fit->add_option("--vocab", topics.vocab)->required();
  add_solver_flags(t_fit, topics.solver, false);
  auto* t_top = c_topics->add_subcommand("top-terms", "most probable terms per topic");
  t_top->add_option("--H", topics.h_path)->required();
  t_top->add_option("--vocab", topics.vocab)->required();
  t_top->add_option("--k", topics.k)->capture_default_str();
  t_top->add_option("--out-dir", topics.out_dir)->capture_default_str();
  auto* t_hist = c_topics->add_subcommand("histogram", "documents per most probable topic");
  t_hist->add_option("--W", topics.w_path)->required();
  t_hist->add_option("--out-dir", topics.out_dir)->capture_default_str();

  ReplayFlags replay;
  auto* c_replay = app.add_subcommand("replay", "re-run a command from its manifest");
  c_replay->add_option("manifest", replay.manifest)->required();
  c_replay->add_option("--out-dir", replay.out_dir, "write outputs here instead");

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e, out, err);
    return rc == 0 ? kExitOk : kExitInvalid;
  }

  try {
    if (c_fact->parsed()) return cmd_factorize(fact, out);
    if (c_an->parsed()) return cmd_analyze(an, out);
    if (c_gen->parsed()) return cmd_generate(gen, out);
    if (f_ingest->parsed()) return cmd_faces_ingest(faces, out);
    if (f_rec->parsed()) return cmd_faces_reconstruct(faces, out);
    if (f_ret->parsed()) return cmd_faces_retrieve(faces, out);
    if (f_err->parsed()) return cmd_faces_error(faces, out);
    if (t_build->parsed()) return cmd_topics_build(topics, out);
    if (t_fit->parsed()) return cmd_topics_fit(topics, out);
    if (t_top->parsed()) return cmd_topics_top_terms(topics, out);
    if (t_hist->parsed()) return cmd_topics_histogram(topics, out);
    if (c_replay->parsed()) return cmd_replay(replay, out, err);
  } catch (const InvalidInput& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const NumericalError& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  } catch (const fs::filesystem_error& e) {
    err << "error: " << e.what() << "\n";
    return kExitInvalid;
  } catch (const std::exception& e) {
    err << "numerical failure: " << e.what() << "\n";
    return kExitNumerical;
  }
  err << "no command given\n";
  return kExitInvalid;
}

}  // namespace smf::cli

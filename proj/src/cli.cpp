#include "npam/cli.hpp"

#include <algorithm>
#include <cmath>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <memory>
#include <sstream>

#include <CLI11.hpp>
#include <json.hpp>

#include "npam/corpus.hpp"
#include "npam/error.hpp"
#include "npam/eval.hpp"
#include "npam/generate.hpp"
#include "npam/npam_sampler.hpp"
#include "npam/pam.hpp"
#include "npam/snapshot.hpp"

namespace npam {

namespace {

namespace fs = std::filesystem;
using nlohmann::json;

std::string default_output_dir() {
  const char* env = std::getenv("NPAM_OUTPUT_DIR");
  return env && *env ? env : ".";
}

std::string read_file(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open " + path.string());
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

void write_file(const fs::path& path, const std::string& text) {
  if (path.has_parent_path()) {
    std::error_code ec;
    fs::create_directories(path.parent_path(), ec);
    if (ec) throw IoError("cannot create directory " + path.parent_path().string());
  }
  std::ofstream out(path, std::ios::binary);
  if (!out) throw IoError("cannot write " + path.string());
  out << text;
  if (!out) throw IoError("write failed for " + path.string());
}

template <typename Fn>
std::string to_text(Fn&& fn) {
  std::ostringstream os;
  fn(os);
  return os.str();
}

std::string numbered(const std::string& stem, std::size_t i, const std::string& ext) {
  std::ostringstream os;
  os << stem << '_' << std::setw(4) << std::setfill('0') << i << ext;
  return os.str();
}

Corpus load_corpus(const std::string& corpus_path, const std::string& vocab_path) {
  std::istringstream in(read_file(corpus_path));
  Corpus corpus = read_bow(in);
  if (vocab_path.empty()) return corpus;
  std::istringstream vin(read_file(vocab_path));
  Vocabulary vocab = read_vocabulary(vin);
  if (vocab.size() != corpus.vocab_size())
    throw InputError("vocabulary has " + std::to_string(vocab.size()) + " words but the corpus declares " +
                     std::to_string(corpus.vocab_size()));
  return Corpus(corpus.documents(), std::move(vocab));
}

// Options shared by train and eval-likelihood.
struct ModelOptions {
  std::string model = "npam";
  std::uint32_t s2 = 5;
  std::uint32_t s3 = 100;
  double root_alpha = 0.01;
  double super_alpha = 0.01;
  TrainConfig train;
  GammaPriors priors;
  bool no_hyper = false;
  std::vector<double> alpha0, gamma0, alpha1, gamma1, phi1;
  double beta = 0.01;

  void add_to(CLI::App* cmd) {
    cmd->add_option("--model", model, "npam or pam")->check(CLI::IsMember({"npam", "pam"}));
    cmd->add_option("--s2", s2, "PAM super-topics");
    cmd->add_option("--s3", s3, "PAM sub-topics");
    cmd->add_option("--root-alpha", root_alpha, "PAM root Dirichlet parameter per component");
    cmd->add_option("--super-alpha", super_alpha, "PAM super-topic Dirichlet parameter per child");
    cmd->add_option("--beta", beta, "word smoothing");
    cmd->add_option("--burn-in", train.burn_in);
    cmd->add_option("--samples", train.n_samples);
    cmd->add_option("--lag", train.sample_lag);
    cmd->add_option("--seed", train.seed);
    cmd->add_flag("--no-hyper", no_hyper, "keep concentrations fixed at their prior means");
    cmd->add_option("--alpha0-prior", alpha0, "Gamma shape and scale")->expected(2);
    cmd->add_option("--gamma0-prior", gamma0, "Gamma shape and scale")->expected(2);
    cmd->add_option("--alpha1-prior", alpha1, "Gamma shape and scale")->expected(2);
    cmd->add_option("--gamma1-prior", gamma1, "Gamma shape and scale")->expected(2);
    cmd->add_option("--phi1-prior", phi1, "Gamma shape and scale")->expected(2);
  }

  void finalize() {
    auto set = [](GammaPrior& p, const std::vector<double>& v) {
      if (v.size() == 2) p = GammaPrior{v[0], v[1]};
    };
    set(priors.alpha0, alpha0);
    set(priors.gamma0, gamma0);
    set(priors.alpha1, alpha1);
    set(priors.gamma1, gamma1);
    set(priors.phi1, phi1);
    priors.beta = beta;
    train.resample_hyperparams = !no_hyper;
    train.validate();
    if (model == "npam")
      priors.validate();
    else
      pam_config().validate();
  }

  PamConfig pam_config() const { return PamConfig{s2, s3, root_alpha, super_alpha, beta}; }

  json to_json() const {
    json j;
    j["model"] = model;
    j["train"] = {{"burn_in", train.burn_in},
                  {"n_samples", train.n_samples},
                  {"sample_lag", train.sample_lag},
                  {"seed", train.seed},
                  {"resample_hyperparams", train.resample_hyperparams}};
    if (model == "npam") {
      auto g = [](const GammaPrior& p) { return json{{"shape", p.shape}, {"scale", p.scale}}; };
      j["priors"] = {{"alpha0", g(priors.alpha0)}, {"gamma0", g(priors.gamma0)}, {"alpha1", g(priors.alpha1)},
                     {"gamma1", g(priors.gamma1)}, {"phi1", g(priors.phi1)},   {"beta", priors.beta}};
    } else {
      j["pam"] = {{"num_super_topics", s2}, {"num_sub_topics", s3}, {"root_alpha", root_alpha},
                  {"super_alpha", super_alpha}, {"beta", beta}};
    }
    return j;
  }
};

struct TrainedRun {
  std::vector<TopicSnapshot> npam;
  std::vector<PamSnapshot> pam;
  std::vector<StructureTrace> trace;
};

TrainedRun train_model(const Corpus& corpus, const ModelOptions& opt) {
  TrainedRun run;
  if (opt.model == "npam") {
    run.npam = train(corpus, opt.train, opt.priors, [&](const NpamChain& chain) {
      run.trace.push_back({chain.sweeps_done(), static_cast<std::uint32_t>(chain.state().categories().size()),
                           static_cast<std::uint32_t>(chain.state().dishes().size())});
    });
  } else {
    run.pam = pam_train(corpus, opt.pam_config(), opt.train);
    for (std::uint64_t s = 1; s <= opt.train.total_sweeps(); ++s) run.trace.push_back({s, opt.s2, opt.s3});
  }
  return run;
}

// ---- commands -------------------------------------------------------------

int cmd_synth(const SyntheticSpec& spec, const std::string& out_dir, std::ostream& out) {
  spec.validate();
  Rng rng(spec.seed);
  auto [corpus, truth] = generate_synthetic(spec, rng);
  sort_tokens_by_word(corpus, truth);
  const fs::path dir(out_dir);
  write_file(dir / "corpus.bow", to_text([&](std::ostream& os) { write_bow(os, corpus); }));
  write_file(dir / "vocab.txt", to_text([&](std::ostream& os) { write_vocabulary(os, corpus.vocabulary()); }));
  write_file(dir / "truth.txt", to_text([&](std::ostream& os) { write_ground_truth(os, truth); }));
  out << "wrote " << corpus.num_documents() << " documents, " << corpus.num_tokens() << " tokens to " << dir.string()
      << "\n";
  return 0;
}

int cmd_ingest(const std::string& text_path, const IngestOptions& options, const std::string& out_dir,
               std::ostream& out) {
  std::istringstream in(read_file(text_path));
  const Corpus corpus = ingest_text(in, options);
  const fs::path dir(out_dir);
  write_file(dir / "corpus.bow", to_text([&](std::ostream& os) { write_bow(os, corpus); }));
  write_file(dir / "vocab.txt", to_text([&](std::ostream& os) { write_vocabulary(os, corpus.vocabulary()); }));
  out << "wrote " << corpus.num_documents() << " documents, " << corpus.vocab_size() << " word types to "
      << dir.string() << "\n";
  return 0;
}

int cmd_train(const std::vector<std::string>& args, const std::string& corpus_path, const std::string& vocab_path,
              ModelOptions opt, const std::string& out_dir, std::ostream& out) {
  opt.finalize();
  const Corpus corpus = load_corpus(corpus_path, vocab_path);
  const TrainedRun run = train_model(corpus, opt);
  const fs::path dir(out_dir);

  json manifest;
  manifest["command"] = "train";
  manifest["args"] = args;
  manifest["corpus"] = corpus_path;
  manifest["vocab"] = vocab_path;
  manifest["config"] = opt.to_json();
  json snaps = json::array();
  const std::size_t n = opt.model == "npam" ? run.npam.size() : run.pam.size();
  for (std::size_t i = 0; i < n; ++i) {
    const std::string snap_name = numbered("snapshot", i + 1, ".json");
    const std::string asg_name = numbered("assignments", i + 1, ".txt");
    std::uint64_t sweep;
    if (opt.model == "npam") {
      write_file(dir / snap_name, snapshot_to_json(run.npam[i]));
      write_file(dir / asg_name, to_text([&](std::ostream& os) { write_assignments(os, run.npam[i].assignments); }));
      sweep = run.npam[i].sweep;
    } else {
      write_file(dir / snap_name, pam_snapshot_to_json(run.pam[i]));
      write_file(dir / asg_name, to_text([&](std::ostream& os) { write_assignments(os, run.pam[i].assignments); }));
      sweep = run.pam[i].sweep;
    }
    snaps.push_back({{"sweep", sweep}, {"snapshot", snap_name}, {"assignments", asg_name}});
  }
  manifest["snapshots"] = snaps;
  json trace = json::array();
  for (const auto& t : run.trace) trace.push_back({t.sweep, t.num_super, t.num_sub});
  manifest["trace"] = {{"columns", {"sweep", "super_topics", "sub_topics"}}, {"rows", trace}};
  write_file(dir / "manifest.json", manifest.dump(1) + "\n");

  out << "wrote " << n << " snapshots to " << dir.string() << "\n";
  if (!run.trace.empty())
    out << "final structure: " << run.trace.back().num_super << " super-topics, " << run.trace.back().num_sub
        << " sub-topics\n";
  return 0;
}

int cmd_eval_likelihood(const std::string& corpus_path, const std::string& vocab_path, ModelOptions opt,
                        std::uint32_t folds, std::uint32_t n_generated, std::uint32_t pseudo_len,
                        const std::string& out_dir, std::ostream& out) {
  opt.finalize();
  if (folds < 2) throw SplitError("need at least 2 folds");
  if (n_generated < 1) throw ParameterError("--n-generated must be >= 1");
  const Corpus corpus = load_corpus(corpus_path, vocab_path);
  const std::uint64_t base_seed = opt.train.seed;
  Rng split_rng(base_seed);
  const auto fold_sets = split_folds(corpus, folds, split_rng);

  std::vector<LikelihoodReport> reports;
  for (std::uint32_t f = 0; f < fold_sets.size(); ++f) {
    const auto& fold = fold_sets[f];
    ModelOptions fold_opt = opt;
    fold_opt.train.seed = base_seed + f;
    const TrainedRun run = train_model(fold.train, fold_opt);
    std::vector<std::shared_ptr<const DocumentGenerator>> members;
    for (const auto& s : run.npam) members.push_back(std::make_shared<NpamGenerator>(s));
    for (const auto& s : run.pam) members.push_back(std::make_shared<PamGenerator>(s));
    const EnsembleGenerator model(std::move(members));
    const auto len = pseudo_len > 0 ? pseudo_len
                                    : static_cast<std::uint32_t>(std::max(1.0, std::round(fold.train.mean_document_length())));
    std::seed_seq seq{base_seed + f, std::uint64_t{1}};
    Rng eval_rng(seq);
    reports.push_back(empirical_likelihood(model, fold.test, n_generated, len, opt.beta, eval_rng));
  }
  LikelihoodReport report = combine_folds(reports);
  if (pseudo_len == 0) report.pseudo_len = 0;  // varies by fold; listed below

  json j;
  j["command"] = "eval-likelihood";
  j["corpus"] = corpus_path;
  j["config"] = opt.to_json();
  j["folds"] = folds;
  j["n_generated"] = n_generated;
  j["fold_log_likelihood"] = report.fold_log_likelihood;
  j["fold_pseudo_len"] = json::array();
  j["fold_test_documents"] = json::array();
  for (std::size_t f = 0; f < reports.size(); ++f) {
    j["fold_pseudo_len"].push_back(reports[f].pseudo_len);
    j["fold_test_documents"].push_back(fold_sets[f].test_documents);
  }
  j["mean_log_likelihood"] = report.mean_log_likelihood;
  j["doc_log_likelihood"] = report.doc_log_likelihood;
  j["scored_tokens"] = report.scored_tokens;
  j["dropped_tokens"] = report.dropped_tokens;

  std::string text = format_likelihood_report(report);
  const fs::path dir(out_dir);
  write_file(dir / "likelihood.txt", text);
  write_file(dir / "likelihood.json", j.dump(1) + "\n");
  if (report.dropped_tokens > 0)
    out << "warning: " << report.dropped_tokens << " test tokens outside the model vocabulary were dropped\n";
  out << text;
  return 0;
}

int cmd_eval_structure(const std::string& truth_path, const std::string& run_dir,
                       std::vector<std::string> assignment_files, const std::string& out_dir, std::ostream& out) {
  std::istringstream tin(read_file(truth_path));
  const GroundTruth truth = read_ground_truth(tin);
  if (assignment_files.empty()) {
    if (run_dir.empty()) throw InputError("give --run or --assignments");
    const json manifest = json::parse(read_file(fs::path(run_dir) / "manifest.json"));
    for (const auto& s : manifest.at("snapshots"))
      assignment_files.push_back((fs::path(run_dir) / s.at("assignments").get<std::string>()).string());
  }
  if (assignment_files.empty()) throw InputError("run has no collected samples");

  std::vector<AccuracyReport> samples;
  for (const auto& file : assignment_files) {
    std::istringstream in(read_file(file));
    samples.push_back(score_structure(truth, read_assignments(in)));
  }
  const AveragedAccuracy report = average_accuracy(std::move(samples));

  json j;
  j["command"] = "eval-structure";
  j["samples"] = report.samples.size();
  j["super_accuracy"] = report.super_accuracy;
  j["sub_accuracy"] = report.sub_accuracy;
  j["super_splits"] = report.super_splits;
  j["sub_splits"] = report.sub_splits;
  j["super_merges"] = report.super_merges;
  j["sub_merges"] = report.sub_merges;
  json per = json::array();
  auto match = [](const std::vector<std::optional<std::uint32_t>>& m) {
    json a = json::array();
    for (const auto& p : m) a.push_back(p ? json(*p) : json(nullptr));
    return a;
  };
  for (const auto& s : report.samples)
    per.push_back({{"super_accuracy", s.super_accuracy},
                   {"sub_accuracy", s.sub_accuracy},
                   {"super_matching", match(s.super_matching)},
                   {"sub_matching", match(s.sub_matching)}});
  j["per_sample"] = per;

  const std::string text = format_accuracy_report(report);
  const fs::path dir(out_dir);
  write_file(dir / "structure.txt", text);
  write_file(dir / "structure.json", j.dump(1) + "\n");
  out << text;
  return 0;
}

int cmd_export_topics(const std::string& snapshot_path, const std::string& vocab_path, std::uint32_t top_n,
                      const std::string& out_dir, std::ostream& out) {
  if (top_n < 1) throw ParameterError("--top must be >= 1");
  const std::string text = read_file(snapshot_path);
  std::string kind;
  try {
    kind = json::parse(text).at("format").get<std::string>();
  } catch (const json::exception& e) {
    throw FormatError(std::string("snapshot: ") + e.what());
  }
  TopicReport report;
  std::uint32_t vocab_size = 0;
  if (kind == "pam-snapshot") {
    const auto snap = pam_snapshot_from_json(text);
    vocab_size = snap.vocab_size;
    report = export_topics(snap, top_n);
  } else {
    const auto snap = snapshot_from_json(text);
    vocab_size = snap.vocab_size;
    report = export_topics(snap, top_n);
  }
  Vocabulary vocab = Vocabulary::numbered(vocab_size);
  if (!vocab_path.empty()) {
    std::istringstream vin(read_file(vocab_path));
    vocab = read_vocabulary(vin);
    if (vocab.size() != vocab_size) throw InputError("vocabulary size does not match the snapshot");
  }

  json j;
  j["super_topics"] = report.num_super;
  j["sub_topics"] = report.num_sub;
  j["mean_children"] = report.mean_children;
  json subs = json::array();
  for (const auto& s : report.sub_topics) {
    json words = json::array();
    for (const auto& w : s.top_words) words.push_back({{"word", vocab.word(w.word)}, {"id", w.word}, {"prob", w.prob}});
    subs.push_back({{"id", s.id}, {"tokens", s.tokens}, {"top_words", words}});
  }
  j["sub"] = subs;
  json supers = json::array();
  for (const auto& s : report.super_topics) {
    json children = json::array();
    for (const auto& c : s.children) children.push_back({{"sub", c.sub_topic}, {"share", c.share}});
    supers.push_back({{"id", s.id}, {"children", children}});
  }
  j["super"] = supers;

  const std::string report_text = format_topic_report(report, vocab);
  const fs::path dir(out_dir);
  write_file(dir / "topics.txt", report_text);
  write_file(dir / "topics.json", j.dump(1) + "\n");
  out << report_text;
  return 0;
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Nonparametric pachinko allocation toolkit"};
  app.require_subcommand(1);
  std::string out_dir = default_output_dir();

  SyntheticSpec spec;
  auto* synth = app.add_subcommand("synth", "generate a grid-vocabulary synthetic corpus");
  synth->add_option("--grid", spec.grid, "grid side v (vocabulary v*v)");
  synth->add_option("--super", spec.num_super, "super-topics");
  synth->add_option("--sub", spec.num_sub, "sub-topics (at most 2v)");
  synth->add_option("--docs", spec.num_docs);
  synth->add_option("--len", spec.doc_length);
  synth->add_option("--root-dirichlet", spec.root_dirichlet);
  synth->add_option("--super-dirichlet", spec.super_dirichlet);
  synth->add_option("--seed", spec.seed);
  synth->add_option("--out", out_dir);

  std::string text_path;
  IngestOptions ingest_opts;
  bool keep_case = false;
  auto* ingest = app.add_subcommand("ingest", "tokenize a text file, one document per line");
  ingest->add_option("--text", text_path)->required();
  ingest->add_option("--min-token-length", ingest_opts.min_token_length);
  ingest->add_flag("--keep-case", keep_case);
  ingest->add_flag("--keep-empty", ingest_opts.keep_empty_documents);
  ingest->add_option("--out", out_dir);

  std::string corpus_path, vocab_path;
  ModelOptions model_opts;
  auto* train_cmd = app.add_subcommand("train", "train a model and save snapshots");
  train_cmd->add_option("--corpus", corpus_path)->required();
  train_cmd->add_option("--vocab", vocab_path);
  model_opts.add_to(train_cmd);
  train_cmd->add_option("--out", out_dir);

  std::uint32_t folds = 5, n_generated = 1000, pseudo_len = 0;
  auto* lik = app.add_subcommand("eval-likelihood", "k-fold empirical likelihood");
  lik->add_option("--corpus", corpus_path)->required();
  lik->add_option("--vocab", vocab_path);
  model_opts.add_to(lik);
  lik->add_option("--folds", folds);
  lik->add_option("--n-generated", n_generated);
  lik->add_option("--pseudo-len", pseudo_len, "0 = training-corpus mean document length");
  lik->add_option("--out", out_dir);

  std::string truth_path, run_dir;
  std::vector<std::string> assignment_files;
  auto* structure = app.add_subcommand("eval-structure", "score recovered structure against ground truth");
  structure->add_option("--truth", truth_path)->required();
  structure->add_option("--run", run_dir, "directory written by train");
  structure->add_option("--assignments", assignment_files);
  structure->add_option("--out", out_dir);

  std::string snapshot_path;
  std::uint32_t top_n = 10;
  auto* exp = app.add_subcommand("export-topics", "top words and connectivity of a snapshot");
  exp->add_option("--snapshot", snapshot_path)->required();
  exp->add_option("--vocab", vocab_path);
  exp->add_option("--top", top_n);
  exp->add_option("--out", out_dir);

  try {
    std::vector<std::string> reversed(args.rbegin(), args.rend());
    app.parse(reversed);
  } catch (const CLI::CallForHelp&) {
    out << app.help();
    return 0;
  } catch (const CLI::CallForAllHelp&) {
    out << app.help("", CLI::AppFormatMode::All);
    return 0;
  } catch (const CLI::ParseError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  }

  try {
    if (*synth) return cmd_synth(spec, out_dir, out);
    if (*ingest) {
      ingest_opts.lowercase = !keep_case;
      return cmd_ingest(text_path, ingest_opts, out_dir, out);
    }
    if (*train_cmd) return cmd_train(args, corpus_path, vocab_path, model_opts, out_dir, out);
    if (*lik) return cmd_eval_likelihood(corpus_path, vocab_path, model_opts, folds, n_generated, pseudo_len, out_dir, out);
    if (*structure) return cmd_eval_structure(truth_path, run_dir, assignment_files, out_dir, out);
    if (*exp) return cmd_export_topics(snapshot_path, vocab_path, top_n, out_dir, out);
  } catch (const IoError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const FormatError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const nlohmann::json::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const InputError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const SpecError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const SplitError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const ParameterError& e) {
    err << "error: " << e.what() << "\n";
    return 1;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  }
  return 1;
}

int run_cli(int argc, char** argv) {
  std::vector<std::string> args(argv + 1, argv + argc);
  return run_cli(args, std::cout, std::cerr);
}

}  // namespace npam

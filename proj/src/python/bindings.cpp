#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <memory>

#include "npam/corpus.hpp"
#include "npam/crp.hpp"
#include "npam/error.hpp"
#include "npam/eval.hpp"
#include "npam/generate.hpp"
#include "npam/npam_sampler.hpp"
#include "npam/pam.hpp"
#include "npam/snapshot.hpp"

namespace py = pybind11;
using namespace npam;

namespace {

std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> pairs(const TokenAssignments& a) {
  std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>> out;
  for (const auto& doc : a) {
    out.emplace_back();
    for (const auto& p : doc) out.back().push_back({p.super_topic, p.sub_topic});
  }
  return out;
}

TokenAssignments from_pairs(const std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>>& a) {
  TokenAssignments out;
  for (const auto& doc : a) {
    out.emplace_back();
    for (const auto& [l, m] : doc) out.back().push_back({l, m});
  }
  return out;
}

py::dict accuracy_dict(const AccuracyReport& r) {
  py::dict d;
  d["super_accuracy"] = r.super_accuracy;
  d["sub_accuracy"] = r.sub_accuracy;
  d["super_matching"] = r.super_matching;
  d["sub_matching"] = r.sub_matching;
  d["super_splits"] = r.super_splits;
  d["sub_splits"] = r.sub_splits;
  d["super_merges"] = r.super_merges;
  d["sub_merges"] = r.sub_merges;
  return d;
}

py::dict topic_dict(const TopicReport& r, const Vocabulary* vocab) {
  py::list subs, supers;
  for (const auto& s : r.sub_topics) {
    py::list words;
    for (const auto& w : s.top_words) {
      if (vocab && w.word < vocab->size())
        words.append(py::make_tuple(vocab->word(w.word), w.prob));
      else
        words.append(py::make_tuple(w.word, w.prob));
    }
    py::dict d;
    d["id"] = s.id;
    d["tokens"] = s.tokens;
    d["top_words"] = words;
    subs.append(d);
  }
  for (const auto& s : r.super_topics) {
    py::list children;
    for (const auto& c : s.children) children.append(py::make_tuple(c.sub_topic, c.share));
    py::dict d;
    d["id"] = s.id;
    d["children"] = children;
    supers.append(d);
  }
  py::dict out;
  out["num_super"] = r.num_super;
  out["num_sub"] = r.num_sub;
  out["mean_children"] = r.mean_children;
  out["sub_topics"] = subs;
  out["super_topics"] = supers;
  return out;
}

py::dict likelihood_dict(const LikelihoodReport& r) {
  py::dict d;
  d["fold_log_likelihood"] = r.fold_log_likelihood;
  d["mean_log_likelihood"] = r.mean_log_likelihood;
  d["doc_log_likelihood"] = r.doc_log_likelihood;
  d["n_generated"] = r.n_generated;
  d["pseudo_len"] = r.pseudo_len;
  d["scored_tokens"] = r.scored_tokens;
  d["dropped_tokens"] = r.dropped_tokens;
  return d;
}

}  // namespace

PYBIND11_MODULE(_npam, m) {
  m.doc() = "Nonparametric pachinko allocation: samplers, baseline and evaluation";

  // Later registrations are tried first, so derived types come after the base.
  auto base = py::register_exception<Error>(m, "NpamError", PyExc_RuntimeError);
  py::register_exception<InputError>(m, "InputError", base.ptr());
  py::register_exception<SpecError>(m, "SpecError", base.ptr());
  py::register_exception<SplitError>(m, "SplitError", base.ptr());
  py::register_exception<ParameterError>(m, "ParameterError", base.ptr());
  py::register_exception<StateError>(m, "StateError", base.ptr());

  py::class_<Vocabulary>(m, "Vocabulary")
      .def(py::init<std::vector<std::string>>())
      .def("__len__", &Vocabulary::size)
      .def("word", &Vocabulary::word)
      .def("find", &Vocabulary::find)
      .def_property_readonly("words", &Vocabulary::words);

  py::class_<Corpus>(m, "Corpus")
      .def(py::init([](const std::vector<std::vector<WordId>>& docs, std::vector<std::string> words) {
             std::vector<Document> d;
             for (const auto& t : docs) d.push_back(Document{t, {}});
             return Corpus(std::move(d), Vocabulary(std::move(words)));
           }),
           py::arg("documents"), py::arg("words"))
      .def_property_readonly("num_documents", &Corpus::num_documents)
      .def_property_readonly("vocab_size", &Corpus::vocab_size)
      .def_property_readonly("num_tokens", &Corpus::num_tokens)
      .def_property_readonly("vocabulary", &Corpus::vocabulary)
      .def_property_readonly("documents", [](const Corpus& c) {
        std::vector<std::vector<WordId>> out;
        for (const auto& d : c.documents()) out.push_back(d.tokens);
        return out;
      });

  m.def("ingest_text", [](const std::vector<std::string>& lines, bool lowercase, std::uint32_t min_token_length) {
    IngestOptions o;
    o.lowercase = lowercase;
    o.min_token_length = min_token_length;
    return ingest_text(lines, o);
  }, py::arg("lines"), py::arg("lowercase") = true, py::arg("min_token_length") = 1);

  m.def("load_bow", [](const std::vector<std::tuple<std::uint64_t, std::uint32_t, std::int64_t>>& triples, std::uint32_t vocab_size) {
    std::vector<BowRecord> records;
    for (const auto& [doc, word, count] : triples) records.push_back(BowRecord{doc, word, count});
    return load_bow(records, vocab_size);
  }, py::arg("records"), py::arg("vocab_size"));

  py::class_<GroundTruth>(m, "GroundTruth")
      .def_property_readonly("labels", [](const GroundTruth& t) { return pairs(t.labels); })
      .def_readonly("super_topics", &GroundTruth::super_topics)
      .def_property_readonly("num_tokens", &GroundTruth::num_tokens);

  m.def("generate_synthetic",
        [](std::uint32_t grid, std::uint32_t num_super, std::uint32_t num_sub, std::uint32_t num_docs,
           std::uint32_t doc_length, std::uint64_t seed) {
          SyntheticSpec s;
          s.grid = grid;
          s.num_super = num_super;
          s.num_sub = num_sub;
          s.num_docs = num_docs;
          s.doc_length = doc_length;
          s.seed = seed;
          s.validate();
          Rng rng(seed);
          auto [corpus, truth] = generate_synthetic(s, rng);
          sort_tokens_by_word(corpus, truth);
          return py::make_tuple(std::move(corpus), std::move(truth));
        },
        py::arg("grid") = 5, py::arg("num_super") = 2, py::arg("num_sub") = 4, py::arg("num_docs") = 100,
        py::arg("doc_length") = 200, py::arg("seed") = 0);

  m.def("split_folds", [](const Corpus& c, std::uint32_t k, std::uint64_t seed) {
    Rng rng(seed);
    py::list out;
    for (auto& f : split_folds(c, k, rng)) out.append(py::make_tuple(f.train, f.test, f.test_documents));
    return out;
  }, py::arg("corpus"), py::arg("k"), py::arg("seed") = 0);

  m.def("crp_weights", [](const std::vector<double>& counts, double alpha) { return crp_weights(counts, alpha); },
        py::arg("counts"), py::arg("alpha"));

  py::class_<Hyperparams>(m, "Hyperparams")
      .def(py::init<>())
      .def_readwrite("alpha0", &Hyperparams::alpha0)
      .def_readwrite("gamma0", &Hyperparams::gamma0)
      .def_readwrite("alpha1", &Hyperparams::alpha1)
      .def_readwrite("gamma1", &Hyperparams::gamma1)
      .def_readwrite("phi1", &Hyperparams::phi1)
      .def_readwrite("beta", &Hyperparams::beta);

  py::class_<TopicSnapshot>(m, "TopicSnapshot")
      .def_readonly("sweep", &TopicSnapshot::sweep)
      .def_readonly("num_super", &TopicSnapshot::num_super)
      .def_readonly("num_sub", &TopicSnapshot::num_sub)
      .def_readonly("vocab_size", &TopicSnapshot::vocab_size)
      .def_readonly("hyper", &TopicSnapshot::hyper)
      .def("super_mixture", &TopicSnapshot::super_mixture)
      .def("sub_mixture", &TopicSnapshot::sub_mixture)
      .def("word_distribution", &TopicSnapshot::word_distribution)
      .def("connectivity", &TopicSnapshot::connectivity)
      .def_property_readonly("assignments", [](const TopicSnapshot& s) { return pairs(s.assignments); })
      .def("to_json", &snapshot_to_json)
      .def_static("from_json", [](const std::string& text) { return snapshot_from_json(text); });

  m.def("train",
        [](const Corpus& corpus, std::uint32_t burn_in, std::uint32_t n_samples, std::uint32_t sample_lag,
           std::uint64_t seed, bool resample_hyperparams) {
          TrainConfig c;
          c.burn_in = burn_in;
          c.n_samples = n_samples;
          c.sample_lag = sample_lag;
          c.seed = seed;
          c.resample_hyperparams = resample_hyperparams;
          py::gil_scoped_release release;
          return train(corpus, c, GammaPriors{});
        },
        py::arg("corpus"), py::arg("burn_in") = 1000, py::arg("n_samples") = 10, py::arg("sample_lag") = 100,
        py::arg("seed") = 0, py::arg("resample_hyperparams") = true);

  m.def("generate_document", [](const TopicSnapshot& s, std::uint32_t length, std::uint64_t seed) {
    Rng rng(seed);
    return generate_document(s, length, rng).tokens;
  }, py::arg("snapshot"), py::arg("length"), py::arg("seed") = 0);

  py::class_<PamSnapshot>(m, "PamSnapshot")
      .def_readonly("sweep", &PamSnapshot::sweep)
      .def_readonly("vocab_size", &PamSnapshot::vocab_size)
      .def("super_mixture", &PamSnapshot::super_mixture)
      .def("sub_mixture", &PamSnapshot::sub_mixture)
      .def("word_distribution", &PamSnapshot::word_distribution)
      .def_property_readonly("assignments", [](const PamSnapshot& s) { return pairs(s.assignments); })
      .def("to_json", &pam_snapshot_to_json);

  m.def("pam_train",
        [](const Corpus& corpus, std::uint32_t s2, std::uint32_t s3, std::uint32_t burn_in, std::uint32_t n_samples,
           std::uint32_t sample_lag, std::uint64_t seed, double root_alpha, double super_alpha, double beta) {
          TrainConfig c;
          c.burn_in = burn_in;
          c.n_samples = n_samples;
          c.sample_lag = sample_lag;
          c.seed = seed;
          py::gil_scoped_release release;
          return pam_train(corpus, PamConfig{s2, s3, root_alpha, super_alpha, beta}, c);
        },
        py::arg("corpus"), py::arg("s2") = 5, py::arg("s3") = 100, py::arg("burn_in") = 1000,
        py::arg("n_samples") = 10, py::arg("sample_lag") = 100, py::arg("seed") = 0, py::arg("root_alpha") = 0.01,
        py::arg("super_alpha") = 0.01, py::arg("beta") = 0.01);

  m.def("empirical_likelihood",
        [](const std::vector<TopicSnapshot>& npam_samples, const std::vector<PamSnapshot>& pam_samples,
           const Corpus& test, std::uint32_t n_generated, std::uint32_t pseudo_len, std::uint64_t seed) {
          std::vector<std::shared_ptr<const DocumentGenerator>> members;
          for (const auto& s : npam_samples) members.push_back(std::make_shared<NpamGenerator>(s));
          for (const auto& s : pam_samples) members.push_back(std::make_shared<PamGenerator>(s));
          const EnsembleGenerator model(std::move(members));
          Rng rng(seed);
          return likelihood_dict(empirical_likelihood(model, test, n_generated, pseudo_len, model.beta(), rng));
        },
        py::arg("npam_samples"), py::arg("pam_samples"), py::arg("test"), py::arg("n_generated") = 1000,
        py::arg("pseudo_len") = 200, py::arg("seed") = 0);

  m.def("score_structure", [](const GroundTruth& truth, const std::vector<std::vector<std::pair<std::uint32_t, std::uint32_t>>>& a) {
    return accuracy_dict(score_structure(truth, from_pairs(a)));
  }, py::arg("truth"), py::arg("assignments"));

  m.def("export_topics", [](const TopicSnapshot& s, std::uint32_t top_n, const Corpus* corpus) {
    return topic_dict(export_topics(s, top_n), corpus ? &corpus->vocabulary() : nullptr);
  }, py::arg("snapshot"), py::arg("top_n") = 10, py::arg("corpus") = nullptr);
}

// Copyright (C) 2026 The Lion Retrieval Authors. All rights reserved.
//
// Licensed under the Apache License, Version 2.0 (the "License"); you may not use this file except in compliance
// with the License. You may obtain a copy of the License at
//
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software distributed under the License
// is distributed on an "AS IS" BASIS, WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express
// or implied. See the License for the specific language governing permissions and limitations under the License.

#include <CLI11.hpp>
#include <algorithm>
#include <filesystem>
#include <iostream>
#include <map>
#include <set>

#include "lion/checkpoint.hpp"
#include "lion/cli.hpp"
#include "lion/data.hpp"
#include "lion/errors.hpp"
#include "lion/evaluation.hpp"
#include "lion/hash.hpp"
#include "lion/index.hpp"
#include "lion/io.hpp"
#include "lion/synthetic.hpp"
#include "lion/trainer.hpp"

namespace lion {

namespace {

namespace fs = std::filesystem;

struct KeyDoc {
    std::string key;
    std::string help;
};

// Keys every subcommand may see in a shared manifest. Values given as
// `<command>.<key>` apply to that command only.
const std::vector<KeyDoc>& model_keys() {
    static const std::vector<KeyDoc> k{
        {"dim", "encoder width D"},
        {"layers", "transformer layers P"},
        {"heads", "attention heads"},
        {"max_len", "maximum sequence length of the encoder"},
        {"init_std", "std of the normal weight init"},
    };
    return k;
}

std::vector<KeyDoc> train_keys() {
    std::vector<KeyDoc> k;
    for (const auto& key : TrainConfig::keys()) k.push_back({key, "training config"});
    return k;
}

struct Command {
    std::string name;
    std::string description;
    std::vector<KeyDoc> keys;
};

std::vector<Command> commands() {
    std::vector<Command> c;
    c.push_back({"make-synthetic",
                 "Write a planted-relevance corpus, queries, qrels and negatives",
                 {{"out_dir", "output directory"},
                  {"vocab_size", "distinct word types"},
                  {"doc_count", "documents"},
                  {"doc_length", "tokens per document"},
                  {"query_length", "tokens per query"},
                  {"train_queries", "training queries"},
                  {"test_queries", "held-out queries"},
                  {"successor_prob", "probability of the fixed successor token"}}});
    Command pretrain{"pretrain",
                     "MNTP pretraining",
                     {{"corpus", "documents (JSON lines or TSV)"},
                      {"vocab", "vocabulary file; built from the corpus and written here when missing"},
                      {"vocab_max_terms", "cap on built vocabulary terms"},
                      {"pretrain_checkpoint", "output checkpoint"},
                      {"pretrain_log", "output training log (JSON lines)"}}};
    for (const auto& k : model_keys()) pretrain.keys.push_back(k);
    for (const auto& k : train_keys()) pretrain.keys.push_back(k);
    c.push_back(pretrain);
    Command finetune{"finetune",
                     "Retrieval fine-tuning (cl, kd_margin_mse, cl_plus_kd)",
                     {{"corpus", "documents"},
                      {"queries", "training queries"},
                      {"qrels", "training judgments"},
                      {"negatives", "explicit negatives file"},
                      {"teacher_scores", "teacher score file"},
                      {"oracle_teacher", "use the lexical-overlap teacher (true/false)"},
                      {"pretrain_checkpoint", "initial weights; fresh init when absent"},
                      {"vocab", "vocabulary file for a fresh init"},
                      {"vocab_max_terms", "cap on built vocabulary terms"},
                      {"checkpoint", "output checkpoint"},
                      {"log", "output training log (JSON lines)"}}};
    for (const auto& k : model_keys()) finetune.keys.push_back(k);
    for (const auto& k : train_keys()) finetune.keys.push_back(k);
    c.push_back(finetune);
    c.push_back({"encode-index",
                 "Encode a corpus into an inverted index (sparse) or dense store",
                 {{"checkpoint", "fine-tuned checkpoint"},
                  {"corpus", "documents"},
                  {"paradigm", "sparse or dense"},
                  {"index", "output index file"},
                  {"vectors", "optional text dump of the document vectors"},
                  {"max_doc_len", "document truncation"},
                  {"threads", "index build threads"}}});
    c.push_back({"search",
                 "Top-k retrieval into a TREC run file",
                 {{"index", "index or dense store"},
                  {"checkpoint", "checkpoint used to encode queries"},
                  {"queries", "queries to run"},
                  {"k", "cutoff (default 10)"},
                  {"run", "output run file"},
                  {"exhaustive", "brute-force scoring instead of the index (true/false)"},
                  {"max_query_len", "query truncation"}}});
    c.push_back({"evaluate",
                 "MRR@k / nDCG@k, optionally a paired t-test against a second run",
                 {{"run", "run file"},
                  {"qrels", "judgments"},
                  {"metric", "mrr or ndcg"},
                  {"k", "cutoff (default 10)"},
                  {"gain", "ndcg gain: exponential or linear"},
                  {"run_b", "second run for the paired t-test"},
                  {"m", "number of comparisons for the Bonferroni correction"},
                  {"report", "write the per-query report here"}}});
    return c;
}

std::string flag_name(const std::string& key) {
    std::string f = key;
    std::replace(f.begin(), f.end(), '_', '-');
    return "--" + f;
}

// Resolved key/values for one command: manifest, then `<command>.` overrides, then flags.
class Settings {
 public:
    Settings(std::string command, KeyValues kv) : command_(std::move(command)), kv_(std::move(kv)) {}

    bool has(const std::string& key) const { return kv_.count(key) != 0; }
    std::string get(const std::string& key) const {
        const auto it = kv_.find(key);
        if (it == kv_.end()) throw ConfigError(command_ + ": missing required key '" + key + "'");
        return it->second;
    }
    std::string get(const std::string& key, const std::string& fallback) const {
        return has(key) ? get(key) : fallback;
    }
    std::size_t count(const std::string& key, std::size_t fallback) const {
        if (!has(key)) return fallback;
        try {
            const long long v = parse_int(get(key));
            if (v < 0) throw ConfigError(key + " must be >= 0");
            return static_cast<std::size_t>(v);
        } catch (const ConfigError&) {
            throw;
        } catch (const std::exception&) {
            throw ConfigError(key + ": expected an integer, got '" + get(key) + "'");
        }
    }
    double real(const std::string& key, double fallback) const {
        if (!has(key)) return fallback;
        try {
            return parse_double(get(key));
        } catch (const std::exception&) {
            throw ConfigError(key + ": expected a number, got '" + get(key) + "'");
        }
    }
    bool flag(const std::string& key) const {
        if (!has(key)) return false;
        const auto v = get(key);
        if (v == "true" || v == "1" || v == "yes" || v.empty()) return true;
        if (v == "false" || v == "0" || v == "no") return false;
        throw ConfigError(key + ": expected true or false, got '" + v + "'");
    }
    // Required input file that must exist now.
    fs::path input(const std::string& key) const {
        const fs::path p = get(key);
        if (!fs::exists(p)) throw InputError(command_ + ": " + key + " path does not exist: " + p.string());
        return p;
    }
    std::optional<fs::path> optional_input(const std::string& key) const {
        if (!has(key)) return std::nullopt;
        return input(key);
    }
    // Output file whose directory must exist.
    fs::path output(const std::string& key) const {
        const fs::path p = get(key);
        const auto dir = p.has_parent_path() ? p.parent_path() : fs::path(".");
        if (!fs::is_directory(dir)) {
            throw InputError(command_ + ": directory for " + key + " does not exist: " + dir.string());
        }
        return p;
    }
    const KeyValues& values() const { return kv_; }

 private:
    std::string command_;
    KeyValues kv_;
};

EncoderConfig model_config(const Settings& s, std::size_t vocab_size) {
    EncoderConfig c;
    c.dim = s.count("dim", c.dim);
    c.layers = s.count("layers", c.layers);
    c.heads = s.count("heads", c.heads);
    c.max_len = s.count("max_len", c.max_len);
    c.init_std = s.real("init_std", c.init_std);
    c.vocab_size = vocab_size;
    c.validate();
    return c;
}

Vocabulary obtain_vocabulary(const Settings& s, const std::vector<CorpusRecord>& corpus) {
    if (s.has("vocab") && fs::exists(s.get("vocab"))) return Vocabulary::load(s.get("vocab"));
    auto vocab = build_vocabulary(corpus, s.count("vocab_max_terms", 30000));
    if (s.has("vocab")) vocab.save(s.output("vocab"));
    return vocab;
}

TrainConfig train_config(const Settings& s) {
    KeyValues train;
    for (const auto& key : TrainConfig::keys()) {
        if (s.has(key)) train[key] = s.get(key);
    }
    return TrainConfig::from_key_values(train);
}

void write_log_summary(std::ostream& out, const TrainResult& r) {
    if (r.log.empty()) return;
    out << "steps\t" << r.log.size() << '\n';
    out << "initial_loss\t" << format_double(r.log.front().loss) << '\n';
    out << "final_loss\t" << format_double(r.log.back().loss) << '\n';
}

// ---------------------------------------------------------------------------

int cmd_make_synthetic(const Settings& s, std::ostream& out) {
    SyntheticSpec spec;
    spec.vocab_size = s.count("vocab_size", spec.vocab_size);
    spec.doc_count = s.count("doc_count", spec.doc_count);
    spec.doc_length = s.count("doc_length", spec.doc_length);
    spec.query_length = s.count("query_length", spec.query_length);
    spec.train_queries = s.count("train_queries", spec.train_queries);
    spec.test_queries = s.count("test_queries", spec.test_queries);
    spec.successor_prob = s.real("successor_prob", spec.successor_prob);
    spec.seed = s.count("seed", 0);
    spec.validate();
    const fs::path dir = s.get("out_dir");
    const auto data = make_synthetic(spec);
    write_synthetic(dir, data);
    write_negatives(dir / "train_negatives.tsv", positives_of_other_queries(data.train_qrels));
    out << "docs\t" << data.docs.size() << "\ntrain_queries\t" << data.train_queries.size() << "\ntest_queries\t"
        << data.test_queries.size() << '\n';
    return 0;
}

int cmd_pretrain(const Settings& s, std::ostream& out) {
    const auto corpus_path = s.input("corpus");
    const auto ckpt_path = s.output("pretrain_checkpoint");
    TrainConfig cfg = train_config(s);
    if (s.has("objective") && cfg.objective != Objective::kMntp) throw ConfigError("pretrain runs the mntp objective");
    cfg.objective = Objective::kMntp;
    cfg.validate();
    const auto corpus = read_corpus(corpus_path);
    if (corpus.empty()) throw InputError("corpus " + corpus_path.string() + " is empty");
    const auto vocab = obtain_vocabulary(s, corpus);
    EncoderModel model(model_config(s, vocab.size()), derive_seed(cfg.seed, "init"));
    const TrainingSet data(vocab, corpus);
    TrainOptions opts;
    opts.checkpoint_path = ckpt_path;
    if (s.has("pretrain_log")) opts.log_path = s.output("pretrain_log");
    const auto result = train(model, data, cfg, opts);
    write_log_summary(out, result);
    out << "checkpoint\t" << ckpt_path.string() << '\n';
    return 0;
}

int cmd_finetune(const Settings& s, std::ostream& out) {
    const auto corpus_path = s.input("corpus");
    const auto queries_path = s.input("queries");
    const auto qrels_path = s.input("qrels");
    const auto negatives_path = s.optional_input("negatives");
    const auto teacher_path = s.optional_input("teacher_scores");
    const auto init_path = s.optional_input("pretrain_checkpoint");
    const auto ckpt_path = s.output("checkpoint");
    const TrainConfig cfg = train_config(s);
    if (cfg.objective == Objective::kMntp) throw ConfigError("finetune needs a retrieval objective; use pretrain for mntp");
    const bool oracle = s.flag("oracle_teacher");
    if (needs_teacher(cfg.objective) && !teacher_path && !oracle) {
        throw ConfigError(to_string(cfg.objective) + " needs teacher_scores or oracle_teacher = true");
    }

    const auto corpus = read_corpus(corpus_path);
    const auto queries = read_corpus(queries_path);
    const auto qrels = read_qrels(qrels_path);
    std::optional<NegativePools> negatives;
    if (negatives_path) negatives = read_negatives(*negatives_path);
    std::shared_ptr<const TeacherSource> teacher;
    if (teacher_path) {
        teacher = std::make_shared<ScoreFileTeacher>(ScoreFileTeacher::load(*teacher_path));
    } else if (oracle) {
        teacher = make_oracle_teacher(queries, corpus);
    }

    std::optional<Checkpoint> init;
    if (init_path) init = load_checkpoint(*init_path);
    const Vocabulary vocab = init ? init->vocab() : obtain_vocabulary(s, corpus);
    EncoderModel model = init ? init->model() : EncoderModel(model_config(s, vocab.size()), derive_seed(cfg.seed, "init"));
    model.set_attention_mode(AttentionMode::kBidirectional);
    if (init) {
        for (const auto& key : model_keys()) {
            if (s.has(key.key)) out << "note\t" << key.key << " ignored: the encoder comes from the pretrain checkpoint\n";
        }
    }

    const TrainingSet data(vocab, corpus, queries, qrels, negatives ? &*negatives : nullptr, teacher);
    TrainOptions opts;
    opts.checkpoint_path = ckpt_path;
    if (s.has("log")) opts.log_path = s.output("log");
    const auto result = train(model, data, cfg, opts);
    write_log_summary(out, result);
    out << "checkpoint\t" << ckpt_path.string() << '\n';
    return 0;
}

int cmd_encode_index(const Settings& s, std::ostream& out) {
    const auto ckpt_path = s.input("checkpoint");
    const auto corpus_path = s.input("corpus");
    const auto index_path = s.output("index");
    std::optional<fs::path> vectors_path;
    if (s.has("vectors")) vectors_path = s.output("vectors");
    const Paradigm paradigm = parse_paradigm(s.get("paradigm"));

    const auto ckpt = load_checkpoint(ckpt_path);
    if (ckpt.paradigm && *ckpt.paradigm != paradigm) {
        throw ConfigError("checkpoint was fine-tuned for the " + to_string(*ckpt.paradigm) +
                          " paradigm, not " + to_string(paradigm));
    }
    const auto corpus = read_corpus(corpus_path);
    if (corpus.empty()) throw InputError("corpus " + corpus_path.string() + " is empty");
    const auto vocab = ckpt.vocab();
    const auto model = ckpt.model();
    const std::size_t max_len = std::min(s.count("max_doc_len", 128), model.config().max_len);
    const EncodedTexts docs(corpus, vocab);

    NoGradGuard no_grad;
    if (paradigm == Paradigm::kSparse) {
        std::vector<std::pair<std::string, SparseVector>> rows;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const Tensor a = represent(model, docs.sequence(i, max_len), paradigm);
            rows.emplace_back(docs.id(i), SparseVector::from_dense(a.data(), kIndexPruneThreshold));
        }
        if (vectors_path) write_sparse_vectors(*vectors_path, rows);
        auto index = InvertedIndex::build(rows, static_cast<unsigned>(std::max<std::size_t>(1, s.count("threads", 1))));
        index.vocab_fingerprint = vocab.fingerprint();
        index.save(index_path);
        const auto st = index.stats();
        out << "docs\t" << st.docs << "\nterms\t" << st.terms << "\npostings\t" << st.postings << "\nmean_nonzeros\t"
            << format_double(st.mean_nonzeros) << '\n';
    } else {
        std::vector<std::pair<std::string, std::vector<double>>> rows;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            const Tensor v = represent(model, docs.sequence(i, max_len), paradigm);
            rows.emplace_back(docs.id(i), std::vector<double>(v.data().begin(), v.data().end()));
        }
        if (vectors_path) write_dense_vectors(*vectors_path, rows);
        auto store = DenseStore::build(rows);
        store.vocab_fingerprint = vocab.fingerprint();
        store.save(index_path);
        out << "docs\t" << store.doc_count() << "\ndim\t" << store.dim() << '\n';
    }
    out << "index\t" << index_path.string() << '\n';
    return 0;
}

int cmd_search(const Settings& s, std::ostream& out, std::ostream& err) {
    const auto index_path = s.input("index");
    const auto ckpt_path = s.input("checkpoint");
    const auto queries_path = s.input("queries");
    const auto run_path = s.output("run");
    const std::size_t k = s.count("k", 10);
    if (k == 0) throw ConfigError("k must be >= 1");
    const bool exhaustive = s.flag("exhaustive");

    const auto ckpt = load_checkpoint(ckpt_path);
    const auto vocab = ckpt.vocab();
    const auto model = ckpt.model();
    const auto kind = peek_index_kind(index_path);
    const Paradigm paradigm = kind == IndexKind::kSparse ? Paradigm::kSparse : Paradigm::kDense;
    if (ckpt.paradigm && *ckpt.paradigm != paradigm) {
        throw ConfigError("index holds " + to_string(paradigm) + " vectors but the checkpoint was fine-tuned for " +
                          to_string(*ckpt.paradigm));
    }
    const auto queries = read_corpus(queries_path);
    const EncodedTexts encoded(queries, vocab);
    const std::size_t max_len = std::min(s.count("max_query_len", 64), model.config().max_len);

    Run run;
    run.tag = "lion-" + to_string(paradigm) + "-" + model.config().size_label();
    NoGradGuard no_grad;
    const auto add = [&](const std::string& qid, const RankedList& list) {
        if (list.empty()) {
            err << "warning: query " << qid << " retrieved nothing\n";
            return;
        }
        auto& ranking = run.rankings[qid];
        for (const auto& r : list) ranking.push_back({r.doc_id, r.score});
    };
    if (kind == IndexKind::kSparse) {
        const auto index = InvertedIndex::load(index_path);
        if (index.vocab_fingerprint != vocab.fingerprint()) {
            throw ConfigError("vocabulary hash mismatch between checkpoint and index");
        }
        for (std::size_t i = 0; i < encoded.size(); ++i) {
            const Tensor a = represent(model, encoded.sequence(i, max_len), paradigm);
            const auto q = SparseVector::from_dense(a.data(), kIndexPruneThreshold);
            add(encoded.id(i), exhaustive ? index.exhaustive_search(q, k) : index.search(q, k));
        }
    } else {
        const auto store = DenseStore::load(index_path);
        if (store.vocab_fingerprint != vocab.fingerprint()) {
            throw ConfigError("vocabulary hash mismatch between checkpoint and dense store");
        }
        for (std::size_t i = 0; i < encoded.size(); ++i) {
            const Tensor v = represent(model, encoded.sequence(i, max_len), paradigm);
            add(encoded.id(i), store.search(v.data(), k));
        }
    }
    write_run(run_path, run);
    out << "queries\t" << encoded.size() << "\nrun\t" << run_path.string() << "\ntag\t" << run.tag << '\n';
    return 0;
}

MetricReport evaluate_run(const Run& run, const Qrels& qrels, const std::string& metric, std::size_t k, Gain gain) {
    if (metric == "mrr") return mrr_at_k(run, qrels, k);
    if (metric == "ndcg") return ndcg_at_k(run, qrels, k, gain);
    throw ConfigError("unknown metric '" + metric + "' (mrr, ndcg)");
}

int cmd_evaluate(const Settings& s, std::ostream& out, std::ostream& err) {
    const auto run_path = s.input("run");
    const auto qrels_path = s.input("qrels");
    const auto run_b_path = s.optional_input("run_b");
    std::optional<fs::path> report_path;
    if (s.has("report")) report_path = s.output("report");
    const std::string metric = s.get("metric", "mrr");
    if (metric != "mrr" && metric != "ndcg") throw ConfigError("unknown metric '" + metric + "' (mrr, ndcg)");
    const std::size_t k = s.count("k", 10);
    if (k == 0) throw ConfigError("k must be >= 1");
    const std::string gain_name = s.get("gain", "exponential");
    if (gain_name != "exponential" && gain_name != "linear") throw ConfigError("gain must be exponential or linear");
    const Gain gain = gain_name == "linear" ? Gain::kLinear : Gain::kExponential;
    std::size_t m = 0;
    if (run_b_path) {
        if (!s.has("m")) throw ConfigError("a paired t-test needs m, the number of comparisons");
        m = s.count("m", 0);
        if (m == 0) throw ConfigError("m must be >= 1");
    }

    const auto qrels = read_qrels(qrels_path);
    const auto report = evaluate_run(read_run(run_path), qrels, metric, k, gain);
    for (const auto& q : report.missing_from_run) err << "warning: query " << q << " has no run entry; scored 0\n";
    for (const auto& q : report.excluded) err << "warning: query " << q << " has nothing relevant; excluded\n";
    write_metric_report(out, report);
    if (report_path) write_file_atomically(*report_path, [&](std::ostream& o) { write_metric_report(o, report); });
    if (run_b_path) {
        const auto other = evaluate_run(read_run(*run_b_path), qrels, metric, k, gain);
        const auto [a, b] = align_reports(report, other);
        const auto t = paired_t_test(a, b, m);
        out << "mean_b\t" << format_double(other.mean) << '\n';
        out << "t\t" << format_double(t.t) << "\np\t" << format_double(t.p) << "\nalpha\t" << format_double(t.alpha)
            << "\nsignificant\t" << (t.significant ? "yes" : "no") << '\n';
    }
    return 0;
}

int dispatch(const std::string& name, const Settings& s, std::ostream& out, std::ostream& err) {
    if (name == "make-synthetic") return cmd_make_synthetic(s, out);
    if (name == "pretrain") return cmd_pretrain(s, out);
    if (name == "finetune") return cmd_finetune(s, out);
    if (name == "encode-index") return cmd_encode_index(s, out);
    if (name == "search") return cmd_search(s, out, err);
    if (name == "evaluate") return cmd_evaluate(s, out, err);
    throw ConfigError("unknown command " + name);
}

}  // namespace

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
    const auto cmds = commands();
    CLI::App app{"lion: desk-scale dense and sparse retrieval", "lion"};
    app.require_subcommand(1);
    std::set<std::string> known{"seed"};
    for (const auto& c : cmds) {
        for (const auto& k : c.keys) known.insert(k.key);
    }

    struct Parsed {
        CLI::App* app;
        std::string config;
        std::map<std::string, std::string> flags;
    };
    std::vector<Parsed> parsed(cmds.size());
    for (std::size_t i = 0; i < cmds.size(); ++i) {
        auto* sub = app.add_subcommand(cmds[i].name, cmds[i].description);
        parsed[i].app = sub;
        sub->add_option("--config", parsed[i].config, "flat key = value manifest");
        sub->add_option("--seed", parsed[i].flags["seed"], "seed; sub-seeds derive from it");
        for (const auto& k : cmds[i].keys) {
            if (k.key == "seed") continue;
            sub->add_option(flag_name(k.key), parsed[i].flags[k.key], k.help);
        }
    }

    try {
        app.parse(argc, argv);
    } catch (const CLI::ParseError& e) {
        const int code = app.exit(e, out, err);
        return code == 0 ? 0 : 2;
    }

    for (std::size_t i = 0; i < cmds.size(); ++i) {
        if (!parsed[i].app->parsed()) continue;
        const auto& cmd = cmds[i];
        try {
            KeyValues kv;
            if (!parsed[i].config.empty()) {
                const KeyValues file = read_key_values(parsed[i].config);
                const std::string prefix = cmd.name + ".";
                for (const auto& [key, value] : file) {
                    const auto dot = key.find('.');
                    const std::string bare = dot == std::string::npos ? key : key.substr(dot + 1);
                    if (!known.count(bare)) throw ConfigError("unknown key '" + key + "' in " + parsed[i].config);
                    if (dot == std::string::npos) kv.emplace(key, value);
                }
                for (const auto& [key, value] : file) {
                    if (key.rfind(prefix, 0) == 0) kv[key.substr(prefix.size())] = value;
                }
            }
            for (const auto& [key, value] : parsed[i].flags) {
                if (parsed[i].app->count(flag_name(key)) > 0) kv[key] = value;
            }
            std::set<std::string> allowed{"seed"};
            for (const auto& k : cmd.keys) allowed.insert(k.key);
            KeyValues own;
            for (const auto& [key, value] : kv) {
                if (allowed.count(key)) own.emplace(key, value);
            }
            return dispatch(cmd.name, Settings(cmd.name, own), out, err);
        } catch (const ConfigError& e) {
            err << "error: " << e.what() << '\n';
            return 2;
        } catch (const InputError& e) {
            err << "error: " << e.what() << '\n';
            return 2;
        } catch (const ParseError& e) {
            err << "error: " << e.what() << '\n';
            return 2;
        } catch (const std::exception& e) {
            err << "error: " << e.what() << '\n';
            return 1;
        }
    }
    return 2;
}

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
    std::vector<const char*> argv{"lion"};
    for (const auto& a : args) argv.push_back(a.c_str());
    return run_cli(static_cast<int>(argv.size()), argv.data(), out, err);
}

}  // namespace lion

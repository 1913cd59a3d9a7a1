// Copyright 2026-present the lisr authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "cli.h"

#include <CLI11.hpp>

#include <charconv>
#include <fstream>
#include <iostream>
#include <memory>
#include <sstream>

#include "lisr/collection.h"
#include "lisr/error.h"
#include "lisr/eval.h"
#include "lisr/index.h"
#include "lisr/search.h"
#include "lisr/synthetic.h"

namespace lisr::cli {

namespace fs = std::filesystem;

namespace {

std::ifstream open_text(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw FormatError(FormatError::Kind::kIo, "cannot open " + path.string());
  return in;
}

std::ofstream create_text(const fs::path& path) {
  std::ofstream out(path);
  if (!out) throw FormatError(FormatError::Kind::kIo, "cannot create " + path.string());
  return out;
}

std::vector<std::string> split_tabs(const std::string& line) {
  std::vector<std::string> out;
  std::size_t start = 0;
  while (true) {
    const auto tab = line.find('\t', start);
    out.push_back(line.substr(start, tab - start));
    if (tab == std::string::npos) break;
    start = tab + 1;
  }
  return out;
}

template <typename T>
T parse_number(const std::string& s, const std::string& what) {
  T value{};
  auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), value);
  if (ec != std::errc() || ptr != s.data() + s.size()) {
    throw ValidationError("bad " + what + " '" + s + "'");
  }
  return value;
}

template <typename T>
std::vector<T> parse_list(const std::string& s, const std::string& what) {
  std::vector<T> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(parse_number<T>(item, what));
  if (out.empty()) throw ValidationError("empty value list for " + what);
  return out;
}

// Output files must land in an existing directory.
const CLI::Validator kWritable(
    [](const std::string& p) {
      const auto parent = fs::path(p).parent_path();
      if (!parent.empty() && !fs::is_directory(parent)) {
        return "directory " + parent.string() + " does not exist";
      }
      return std::string();
    },
    "WRITABLE");

struct Collections {
  std::shared_ptr<const Collection> docs;
  Collection queries{0};
  std::vector<std::string> qids;
};

Collections load_search_inputs(const std::string& collection,
                               const std::string& queries) {
  Collections in;
  in.docs = std::make_shared<const Collection>(read_collection(fs::path(collection)));
  in.queries = read_collection(fs::path(queries));
  in.qids = read_qids(queries, in.queries.size());
  return in;
}

// --- build-index ---------------------------------------------------------

struct BuildIndexArgs {
  std::string collection;
  std::string out;
  BuildConfig cfg;
};

void cmd_build_index(const BuildIndexArgs& a, std::ostream& out) {
  a.cfg.validate();
  auto docs = std::make_shared<const Collection>(read_collection(fs::path(a.collection)));
  const auto ix = build_index(docs, a.cfg);
  write_index(ix, fs::path(a.out));
  const auto s = index_stats(ix);
  out << "lists=" << s.n_lists << " postings=" << s.n_postings
      << " blocks=" << s.n_blocks << " summary_nnz=" << s.summary_nnz
      << " mass_retained=" << s.summary_mass_retained << " bytes=" << s.bytes
      << '\n';
}

// --- fit-table -----------------------------------------------------------

struct FitArgs {
  std::string triples;
  std::string collection;
  std::string embeddings;
  std::string vocab;
  std::string out;
  std::string log;
  std::string loss = "kl";
  std::string reg = "l1";
  FitConfig cfg;
};

void cmd_fit_table(FitArgs a, std::ostream& out) {
  a.cfg.loss = parse_rank_loss(a.loss);
  a.cfg.reg = parse_regularizer(a.reg);
  a.cfg.validate();
  const auto vocab = TokenizerVocab::load(fs::path(a.vocab));
  const auto docs = read_collection(fs::path(a.collection));
  const auto emb = read_embeddings(fs::path(a.embeddings));
  if (emb.rows() != vocab.size()) {
    throw ValidationError("embeddings have " + std::to_string(emb.rows()) +
                          " rows but the vocabulary has " +
                          std::to_string(vocab.size()) + " tokens");
  }
  if (docs.vocab_size() > emb.rows()) {
    throw ValidationError("collection vocabulary exceeds the embedding rows");
  }
  const auto triples = make_triples(read_triples_tsv(a.triples), vocab, docs);
  const auto specials = vocab.special_ids();
  const auto result = fit(triples, emb, a.cfg, specials);
  write_table(result.table, fs::path(a.out));
  const fs::path log_path = a.log.empty() ? fs::path(a.out + ".log.csv") : fs::path(a.log);
  auto log = create_text(log_path);
  write_training_log(result.log, log);
  if (!log) throw FormatError(FormatError::Kind::kIo, "write failed: " + log_path.string());
  if (!result.log.empty()) {
    out << "steps=" << a.cfg.steps << " final_loss=" << result.log.back().loss.total
        << '\n';
  } else {
    out << "steps=0\n";
  }
}

// --- encode --------------------------------------------------------------

struct EncodeArgs {
  std::string queries;
  std::string table;
  std::string vocab;
  std::string out;
  std::string idf;
};

void cmd_encode(const EncodeArgs& a, std::ostream& out, std::ostream& err) {
  const auto vocab = TokenizerVocab::load(fs::path(a.vocab));
  ScoreTable table = read_table(fs::path(a.table), vocab.size());
  if (!a.idf.empty()) table = combine_idf(table, read_idf(fs::path(a.idf)));
  const auto lines = read_queries_tsv(a.queries);

  Collection encoded(static_cast<std::uint32_t>(table.size()));
  std::vector<const QueryLine*> rejected;
  auto qids = create_text(qids_path(a.out));
  for (const auto& line : lines) {
    try {
      encoded.add(encode_query(tokenize(line.text, vocab), table));
      qids << line.qid << '\n';
    } catch (const EmptyQueryError&) {
      rejected.push_back(&line);
    }
  }
  write_collection(encoded, fs::path(a.out));
  auto rejects = create_text(rejects_path(a.out));
  for (const auto* r : rejected) rejects << r->qid << '\t' << r->text << '\n';
  if (!qids || !rejects) throw FormatError(FormatError::Kind::kIo, "write failed");
  if (!rejected.empty()) {
    err << "warning: " << rejected.size()
        << " queries encode to empty vectors; see " << rejects_path(a.out).string()
        << '\n';
  }
  out << "encoded=" << encoded.size() << " rejected=" << rejected.size() << '\n';
}

// --- idf -----------------------------------------------------------------

void cmd_idf(const std::string& collection, const std::string& out_path,
             std::ostream& out) {
  const auto idf = compute_idf(read_collection(fs::path(collection)));
  write_idf(idf, fs::path(out_path));
  out << "docs=" << idf.n_docs << " vocab=" << idf.idf.size() << '\n';
}

// --- search --------------------------------------------------------------

struct SearchArgs {
  std::string collection;
  std::string queries;
  std::string index;
  std::string mode = "exact";
  std::string out;
  SearchParams params;
};

void cmd_search(const SearchArgs& a, std::ostream& out) {
  a.params.validate();
  const bool approx = a.mode == "approx";
  if (approx && a.index.empty()) {
    throw ValidationError("approx mode needs --index");
  }
  const auto in = load_search_inputs(a.collection, a.queries);
  std::unique_ptr<InvertedIndex> ix;
  if (approx) ix = std::make_unique<InvertedIndex>(read_index(fs::path(a.index), in.docs));

  Searcher searcher(*in.docs);
  std::vector<TopKResult> results;
  results.reserve(in.queries.size());
  for (const auto& q : in.queries) {
    results.push_back(approx ? searcher.approximate(q, *ix, a.params)
                             : searcher.exhaustive(q, a.params.k));
  }
  write_run(run_from_results(in.qids, results), fs::path(a.out));
  out << "queries=" << results.size() << '\n';
}

// --- evaluate ------------------------------------------------------------

struct EvaluateArgs {
  std::string run;
  std::string qrels;
  std::string metric = "mrr";
  std::size_t k = 10;
};

MetricReport evaluate(const std::string& metric, const Run& run,
                      const Qrels& qrels, std::size_t k) {
  return metric == "ndcg" ? ndcg_at_k(run, qrels, k) : mrr_at_k(run, qrels, k);
}

void cmd_evaluate(const EvaluateArgs& a, std::ostream& out, std::ostream& err) {
  const auto report = evaluate(a.metric, read_run(fs::path(a.run)),
                               read_qrels(fs::path(a.qrels)), a.k);
  if (report.n_skipped > 0) {
    err << "warning: " << report.n_skipped << " run queries skipped (no usable judgments)\n";
  }
  write_metric_csv(std::span<const MetricReport>(&report, 1), out);
}

// --- bench ---------------------------------------------------------------

struct BenchArgs {
  std::string collection;
  std::string queries;
  std::string index;
  std::string qrels;
  std::string metric = "mrr";
  std::string sweep;
  std::string out;
  BuildConfig cfg;
  SearchParams params;
};

void cmd_bench(const BenchArgs& a, std::ostream& out) {
  a.params.validate();
  Sweep grid = parse_sweep(a.sweep);
  if (grid.lambda.empty() && a.index.empty()) {
    throw ValidationError("bench needs --index or a lambda axis in --sweep");
  }
  if (!grid.lambda.empty() && !a.index.empty()) {
    throw ValidationError("--index and a lambda sweep are exclusive");
  }
  const auto in = load_search_inputs(a.collection, a.queries);
  const auto& queries = in.queries.docs();
  Qrels qrels;
  if (!a.qrels.empty()) qrels = read_qrels(fs::path(a.qrels));

  std::vector<BenchRow> rows;
  auto finish_row = [&](BenchRow row, const BenchResult& r) {
    row.k = a.params.k;
    row.aqt_us = r.aqt_us;
    if (!a.qrels.empty()) {
      row.metric = a.metric + "_at_" + std::to_string(a.params.k);
      row.metric_value =
          evaluate(a.metric, run_from_results(in.qids, r.results), qrels, a.params.k)
              .value;
    }
    rows.push_back(std::move(row));
  };

  {
    BenchRow row;
    row.mode = "exact";
    row.recall_at_k = 1.0;
    finish_row(row, bench_aqt(queries, SearchMode::kExhaustive, *in.docs, nullptr,
                              a.params));
  }

  auto run_index = [&](const InvertedIndex& ix) {
    const auto cuts = grid.query_cut.empty() ? std::vector<std::size_t>{a.params.query_cut}
                                             : grid.query_cut;
    const auto factors =
        grid.heap_factor.empty() ? std::vector<double>{a.params.heap_factor} : grid.heap_factor;
    for (std::size_t cut : cuts) {
      for (double hf : factors) {
        SearchParams p = a.params;
        p.query_cut = cut;
        p.heap_factor = hf;
        p.validate();
        BenchRow row;
        row.mode = "approx";
        row.lambda = ix.config().max_postings;
        row.alpha = ix.config().alpha;
        row.centroid_fraction = ix.config().centroid_fraction;
        row.query_cut = cut;
        row.heap_factor = hf;
        row.recall_at_k = recall_vs_exact(queries, *in.docs, ix, p);
        finish_row(row, bench_aqt(queries, SearchMode::kApproximate, *in.docs, &ix, p));
      }
    }
  };

  if (!a.index.empty()) {
    run_index(read_index(fs::path(a.index), in.docs));
  } else {
    const auto alphas = grid.alpha.empty() ? std::vector<double>{a.cfg.alpha} : grid.alpha;
    const auto fractions = grid.centroid_fraction.empty()
                               ? std::vector<double>{a.cfg.centroid_fraction}
                               : grid.centroid_fraction;
    for (std::uint32_t lambda : grid.lambda) {
      for (double alpha : alphas) {
        for (double cf : fractions) {
          BuildConfig cfg = a.cfg;
          cfg.max_postings = lambda;
          cfg.alpha = alpha;
          cfg.centroid_fraction = cf;
          run_index(build_index(in.docs, cfg));
        }
      }
    }
  }

  auto csv = create_text(a.out);
  write_bench_csv(rows, csv);
  if (!csv) throw FormatError(FormatError::Kind::kIo, "write failed: " + a.out);
  out << "rows=" << rows.size() << '\n';
}

// --- stats ---------------------------------------------------------------

void cmd_stats(const std::string& collection, const std::string& index,
               std::ostream& out) {
  auto docs = std::make_shared<const Collection>(read_collection(fs::path(collection)));
  const auto s = collection_stats(*docs);
  out << "docs=" << s.n_docs << " vocab=" << docs->vocab_size()
      << " avg_nnz=" << s.avg_nnz << " total_nnz=" << s.total_nnz
      << " footprint_bytes=" << s.footprint_bytes << '\n';
  if (s.vocab_exceeds_16bit) {
    out << "note: vocabulary exceeds 2^16 tokens; 16-bit footprint understates ids\n";
  }
  if (!index.empty()) {
    const auto is = index_stats(read_index(fs::path(index), docs));
    out << "lists=" << is.n_lists << " postings=" << is.n_postings
        << " blocks=" << is.n_blocks << " summary_nnz=" << is.summary_nnz
        << " mass_retained=" << is.summary_mass_retained << " bytes=" << is.bytes
        << '\n';
  }
}

// --- synth ---------------------------------------------------------------

struct SynthQueriesArgs {
  std::string collection;
  std::string out;
  std::size_t n = 200;
  std::size_t nnz = 16;
  std::uint64_t seed = 5;
};

void write_queries(const Collection& queries, const fs::path& path) {
  write_collection(queries, path);
  auto qids = create_text(qids_path(path));
  for (std::size_t i = 0; i < queries.size(); ++i) qids << i << '\n';
  if (!qids) throw FormatError(FormatError::Kind::kIo, "write failed");
}

void cmd_synth_queries(const SynthQueriesArgs& a, std::ostream& out) {
  const auto docs = read_collection(fs::path(a.collection));
  Collection queries(docs.vocab_size());
  for (auto& q : synthetic_queries(docs, a.n, a.nnz, a.seed)) queries.add(std::move(q));
  write_queries(queries, a.out);
  out << "queries=" << queries.size() << '\n';
}

struct SynthPlantedArgs {
  std::string out_dir;
  PlantedConfig cfg;
  std::size_t n_queries = 100;
};

// Planted fixture: everything fit-table, encode, search and evaluate need,
// plus the planted table and held-out queries judged by it.
void cmd_synth_planted(const SynthPlantedArgs& a, std::ostream& out) {
  const fs::path dir(a.out_dir);
  fs::create_directories(dir);
  const auto m = planted_model(a.cfg);
  {
    auto vocab = create_text(dir / "vocab.txt");
    for (const auto& t : m.vocab) vocab << t << '\n';
  }
  write_embeddings(m.embeddings, dir / "embeddings.lsre");
  write_collection(m.docs, dir / "docs.lsrc");
  write_table(m.table(), dir / "planted.table");

  std::vector<TripleLine> lines;
  for (std::size_t i = 0; i < m.triples.size(); ++i) {
    const auto& t = m.triples[i];
    lines.push_back({"t" + std::to_string(i), query_text(t.query_tokens, m.vocab),
                     m.pos_ids[i], m.neg_ids[i], t.teacher_pos, t.teacher_neg});
  }
  write_triples_tsv(lines, dir / "triples.tsv");

  // Held-out queries; the planted table's top document is the relevant one.
  const auto truth = m.table();
  auto queries = create_text(dir / "queries.tsv");
  auto qrels = create_text(dir / "qrels.txt");
  std::size_t written = 0;
  const std::uint64_t attempts = 100 * a.n_queries + 1000;
  for (std::uint64_t s = 0; written < a.n_queries; ++s) {
    if (s == attempts) throw ValidationError("planted table scores too few queries above zero");
    const auto tokens = planted_query(a.cfg, a.cfg.seed * 1000003ULL + s);
    TopKResult top;
    try {
      top = search_exhaustive(encode_query(tokens, truth), m.docs, 1);
    } catch (const EmptyQueryError&) {
      continue;
    }
    if (top.hits.empty() || top.hits[0].score <= 0.0) continue;
    const std::string qid = "q" + std::to_string(written++);
    queries << qid << '\t' << query_text(tokens, m.vocab) << '\n';
    qrels << qid << " 0 " << top.hits[0].doc << " 1\n";
  }
  if (!queries || !qrels) throw FormatError(FormatError::Kind::kIo, "write failed");
  out << "triples=" << lines.size() << " queries=" << written << '\n';
}

void cmd_synth_collection(const SyntheticConfig& cfg, const std::string& path,
                          std::ostream& out) {
  const auto c = synthetic_collection(cfg);
  write_collection(c, fs::path(path));
  out << "docs=" << c.size() << " vocab=" << c.vocab_size() << '\n';
}

}  // namespace

// --- file helpers ----------------------------------------------------------

std::vector<QueryLine> read_queries_tsv(const fs::path& path) {
  auto in = open_text(path);
  std::vector<QueryLine> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos || tab == 0) {
      throw FormatError(FormatError::Kind::kBadValue,
                        path.string() + ":" + std::to_string(line_no) +
                            ": expected 'qid<TAB>text'");
    }
    out.push_back({line.substr(0, tab), line.substr(tab + 1)});
  }
  return out;
}

std::vector<TripleLine> read_triples_tsv(const fs::path& path) {
  auto in = open_text(path);
  std::vector<TripleLine> out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto f = split_tabs(line);
    const auto where = path.string() + ":" + std::to_string(line_no);
    if (f.size() != 6) {
      throw FormatError(FormatError::Kind::kBadValue,
                        where + ": expected 6 tab-separated fields");
    }
    try {
      out.push_back({f[0], f[1], parse_number<DocId>(f[2], "doc id"),
                     parse_number<DocId>(f[3], "doc id"),
                     parse_number<double>(f[4], "teacher score"),
                     parse_number<double>(f[5], "teacher score")});
    } catch (const ValidationError& e) {
      throw FormatError(FormatError::Kind::kBadValue, where + ": " + e.what());
    }
  }
  return out;
}

void write_triples_tsv(const std::vector<TripleLine>& lines, const fs::path& path) {
  auto out = create_text(path);
  char buf[32];
  auto num = [&](double v) {
    auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, ptr);
  };
  for (const auto& l : lines) {
    out << l.qid << '\t' << l.text << '\t' << l.pos << '\t' << l.neg << '\t'
        << num(l.teacher_pos) << '\t' << num(l.teacher_neg) << '\n';
  }
  if (!out) throw FormatError(FormatError::Kind::kIo, "write failed: " + path.string());
}

std::vector<TrainTriple> make_triples(const std::vector<TripleLine>& lines,
                                      const TokenizerVocab& vocab,
                                      const Collection& docs) {
  const auto specials = vocab.special_ids();
  std::vector<TrainTriple> out;
  out.reserve(lines.size());
  for (const auto& l : lines) {
    if (l.pos >= docs.size() || l.neg >= docs.size()) {
      throw ValidationError("triple " + l.qid + " references a doc outside the collection");
    }
    out.push_back({strip_tokens(tokenize(l.text, vocab), specials), docs[l.pos],
                   docs[l.neg], l.teacher_pos, l.teacher_neg});
  }
  return out;
}

fs::path qids_path(const fs::path& queries) { return fs::path(queries.string() + ".qids"); }

fs::path rejects_path(const fs::path& queries) {
  return fs::path(queries.string() + ".rejects");
}

std::vector<std::string> read_qids(const fs::path& queries, std::size_t n) {
  std::vector<std::string> qids;
  const auto sidecar = qids_path(queries);
  if (!fs::exists(sidecar)) {
    for (std::size_t i = 0; i < n; ++i) qids.push_back(std::to_string(i));
    return qids;
  }
  auto in = open_text(sidecar);
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (!line.empty()) qids.push_back(line);
  }
  if (qids.size() != n) {
    throw FormatError(FormatError::Kind::kBadValue,
                      sidecar.string() + " lists " + std::to_string(qids.size()) +
                          " qids for " + std::to_string(n) + " queries");
  }
  return qids;
}

Sweep parse_sweep(const std::string& text) {
  Sweep s;
  std::stringstream ss(text);
  std::string axis;
  while (std::getline(ss, axis, ';')) {
    if (axis.empty()) continue;
    const auto eq = axis.find('=');
    if (eq == std::string::npos) throw ValidationError("sweep axis needs key=values: " + axis);
    const auto key = axis.substr(0, eq);
    const auto values = axis.substr(eq + 1);
    if (key == "lambda") {
      s.lambda = parse_list<std::uint32_t>(values, key);
    } else if (key == "alpha") {
      s.alpha = parse_list<double>(values, key);
    } else if (key == "centroid_fraction") {
      s.centroid_fraction = parse_list<double>(values, key);
    } else if (key == "query_cut") {
      s.query_cut = parse_list<std::size_t>(values, key);
    } else if (key == "heap_factor") {
      s.heap_factor = parse_list<double>(values, key);
    } else {
      throw ValidationError("unknown sweep key '" + key + "'");
    }
  }
  return s;
}

// --- dispatch --------------------------------------------------------------

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app("Static-table learned sparse retrieval toolkit", "lisr");
  app.require_subcommand(1);
  app.set_config("--config", "", "TOML/INI file with option defaults; flags win");
  app.allow_config_extras(CLI::config_extras_mode::error);

  const auto existing = CLI::ExistingFile;

  BuildIndexArgs bi;
  auto* build = app.add_subcommand("build-index", "Build a clustered inverted index");
  build->add_option("collection", bi.collection, "Collection file")->required()->check(existing);
  build->add_option("out", bi.out, "Index output path")->required()->check(kWritable);
  build->add_option("--lambda", bi.cfg.max_postings, "Posting list length")->capture_default_str();
  build->add_option("--alpha", bi.cfg.alpha, "Summary energy in (0, 1]")->capture_default_str();
  build->add_option("--centroid-fraction", bi.cfg.centroid_fraction,
                    "Blocks per list as a fraction of its length")
      ->capture_default_str();
  build->add_option("--seed", bi.cfg.seed, "Seed")->capture_default_str();

  FitArgs fa;
  auto* fitc = app.add_subcommand("fit-table", "Fit the score table by distillation");
  fitc->add_option("triples", fa.triples, "Triples TSV")->required()->check(existing);
  fitc->add_option("collection", fa.collection, "Document collection")->required()->check(existing);
  fitc->add_option("embeddings", fa.embeddings, "Embedding matrix")->required()->check(existing);
  fitc->add_option("vocab", fa.vocab, "Vocabulary, one token per line")->required()->check(existing);
  fitc->add_option("out", fa.out, "Table output path")->required()->check(kWritable);
  fitc->add_option("--log", fa.log, "Training log CSV (default: <out>.log.csv)")->check(kWritable);
  fitc->add_option("--loss", fa.loss, "kl | mse | pointwise-mse")->capture_default_str();
  fitc->add_option("--reg", fa.reg, "l1 | flops")->capture_default_str();
  fitc->add_option("--lambda-q", fa.cfg.lambda_q, "Query regularizer weight")->capture_default_str();
  fitc->add_option("--lambda-d", fa.cfg.lambda_d, "Document regularizer weight (reported only)")
      ->capture_default_str();
  fitc->add_option("--lr", fa.cfg.lr, "Learning rate")->capture_default_str();
  fitc->add_option("--steps", fa.cfg.steps, "Gradient steps")->capture_default_str();
  fitc->add_option("--batch", fa.cfg.batch_size, "Batch size")->capture_default_str();
  fitc->add_option("--seed", fa.cfg.seed, "Seed")->capture_default_str();

  EncodeArgs ea;
  auto* enc = app.add_subcommand("encode", "Encode raw queries with a score table");
  enc->add_option("queries", ea.queries, "Queries TSV (qid<TAB>text)")->required()->check(existing);
  enc->add_option("table", ea.table, "Score table")->required()->check(existing);
  enc->add_option("vocab", ea.vocab, "Vocabulary")->required()->check(existing);
  enc->add_option("out", ea.out, "Encoded queries (collection format)")->required()->check(kWritable);
  enc->add_option("--idf", ea.idf, "IDF file to multiply into the table")->check(existing);

  std::string idf_collection;
  std::string idf_out;
  auto* idfc = app.add_subcommand("idf", "Compute document-frequency IDF");
  idfc->add_option("collection", idf_collection, "Collection")->required()->check(existing);
  idfc->add_option("out", idf_out, "IDF output path")->required()->check(kWritable);

  SearchArgs sa;
  auto* search = app.add_subcommand("search", "Retrieve top-k documents per query");
  search->add_option("--collection", sa.collection, "Document collection")->required()->check(existing);
  search->add_option("--queries", sa.queries, "Encoded queries")->required()->check(existing);
  search->add_option("--index", sa.index, "Index (approx mode)")->check(existing);
  search->add_option("--mode", sa.mode, "exact | approx")
      ->check(CLI::IsMember({"exact", "approx"}))
      ->capture_default_str();
  search->add_option("--k", sa.params.k, "Results per query")->capture_default_str();
  search->add_option("--query-cut", sa.params.query_cut, "Query tokens traversed (0 = all)")
      ->capture_default_str();
  search->add_option("--heap-factor", sa.params.heap_factor, "Block pruning factor in (0, 1]")
      ->capture_default_str();
  search->add_option("out", sa.out, "TREC run output")->required()->check(kWritable);

  EvaluateArgs va;
  auto* evalc = app.add_subcommand("evaluate", "Score a run against qrels");
  evalc->add_option("run", va.run, "TREC run")->required()->check(existing);
  evalc->add_option("qrels", va.qrels, "TREC qrels")->required()->check(existing);
  evalc->add_option("--metric", va.metric, "mrr | ndcg")
      ->check(CLI::IsMember({"mrr", "ndcg"}))
      ->capture_default_str();
  evalc->add_option("--k", va.k, "Cutoff")->check(CLI::PositiveNumber)->capture_default_str();

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Time exact and approximate search");
  bench->add_option("--collection", ba.collection, "Document collection")->required()->check(existing);
  bench->add_option("--queries", ba.queries, "Encoded queries")->required()->check(existing);
  bench->add_option("--index", ba.index, "Prebuilt index")->check(existing);
  bench->add_option("--sweep", ba.sweep, "Grid, e.g. \"lambda=2000,4000;heap_factor=1\"");
  bench->add_option("--qrels", ba.qrels, "Qrels for an effectiveness column")->check(existing);
  bench->add_option("--metric", ba.metric, "mrr | ndcg")
      ->check(CLI::IsMember({"mrr", "ndcg"}))
      ->capture_default_str();
  bench->add_option("--alpha", ba.cfg.alpha, "Summary energy")->capture_default_str();
  bench->add_option("--centroid-fraction", ba.cfg.centroid_fraction, "Centroid fraction")
      ->capture_default_str();
  bench->add_option("--seed", ba.cfg.seed, "Index seed")->capture_default_str();
  bench->add_option("--k", ba.params.k, "Results per query")->capture_default_str();
  bench->add_option("--query-cut", ba.params.query_cut, "Query tokens traversed")
      ->capture_default_str();
  bench->add_option("--heap-factor", ba.params.heap_factor, "Block pruning factor")
      ->capture_default_str();
  bench->add_option("out", ba.out, "CSV output")->required()->check(kWritable);

  std::string stats_collection;
  std::string stats_index;
  auto* stats = app.add_subcommand("stats", "Collection footprint and index statistics");
  stats->add_option("collection", stats_collection, "Collection")->required()->check(existing);
  stats->add_option("--index", stats_index, "Index built over the collection")->check(existing);

  auto* synth = app.add_subcommand("synth", "Generate synthetic fixtures");
  synth->require_subcommand(1);
  SyntheticConfig sc;
  std::string sc_out;
  auto* synth_c = synth->add_subcommand("collection", "Zipf-distributed sparse documents");
  synth_c->add_option("out", sc_out, "Collection output")->required()->check(kWritable);
  synth_c->add_option("--docs", sc.n_docs, "Documents")->capture_default_str();
  synth_c->add_option("--vocab", sc.vocab_size, "Vocabulary size")->capture_default_str();
  synth_c->add_option("--nnz", sc.avg_nnz, "Mean non-zeros per document")->capture_default_str();
  synth_c->add_option("--zipf", sc.zipf_exponent, "Zipf exponent")->capture_default_str();
  synth_c->add_option("--seed", sc.seed, "Seed")->capture_default_str();
  SynthQueriesArgs sq;
  auto* synth_q = synth->add_subcommand("queries", "Sparse queries drawn from a collection");
  synth_q->add_option("collection", sq.collection, "Collection")->required()->check(existing);
  synth_q->add_option("out", sq.out, "Queries output")->required()->check(kWritable);
  synth_q->add_option("--n", sq.n, "Queries")->capture_default_str();
  synth_q->add_option("--nnz", sq.nnz, "Tokens per query")->capture_default_str();
  synth_q->add_option("--seed", sq.seed, "Seed")->capture_default_str();
  SynthPlantedArgs sp;
  auto* synth_p = synth->add_subcommand("planted", "Planted-model distillation fixture");
  synth_p->add_option("out_dir", sp.out_dir, "Output directory")->required();
  synth_p->add_option("--vocab", sp.cfg.vocab_size, "Vocabulary size")->capture_default_str();
  synth_p->add_option("--dim", sp.cfg.dim, "Embedding dimension")->capture_default_str();
  synth_p->add_option("--triples", sp.cfg.n_triples, "Training triples")->capture_default_str();
  synth_p->add_option("--docs", sp.cfg.n_docs, "Documents")->capture_default_str();
  synth_p->add_option("--queries", sp.n_queries, "Held-out queries")->capture_default_str();
  synth_p->add_option("--seed", sp.cfg.seed, "Seed")->capture_default_str();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitValidation;
  }

  try {
    if (*build) cmd_build_index(bi, out);
    if (*fitc) cmd_fit_table(fa, out);
    if (*enc) cmd_encode(ea, out, err);
    if (*idfc) cmd_idf(idf_collection, idf_out, out);
    if (*search) cmd_search(sa, out);
    if (*evalc) cmd_evaluate(va, out, err);
    if (*bench) cmd_bench(ba, out);
    if (*stats) cmd_stats(stats_collection, stats_index, out);
    if (*synth_c) cmd_synth_collection(sc, sc_out, out);
    if (*synth_q) cmd_synth_queries(sq, out);
    if (*synth_p) cmd_synth_planted(sp, out);
  } catch (const DivergenceError& e) {
    err << "error: " << e.what() << '\n';
    return kExitDivergence;
  } catch (const ValidationError& e) {
    err << "error: " << e.what() << '\n';
    return kExitValidation;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << '\n';
    return kExitRuntime;
  }
  return kExitOk;
}

}  // namespace lisr::cli

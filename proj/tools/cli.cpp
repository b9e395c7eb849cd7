#include "cli.hpp"

#include <fstream>
#include <memory>
#include <ostream>
#include <sstream>

#include <CLI11.hpp>

#include "deepwriter/assembler.hpp"
#include "deepwriter/config.hpp"
#include "deepwriter/error.hpp"
#include "deepwriter/evaluator.hpp"
#include "deepwriter/ingestion.hpp"
#include "deepwriter/kb_store.hpp"
#include "deepwriter/pipeline.hpp"

namespace fs = std::filesystem;

namespace deepwriter::cli {

namespace {

struct CommonOptions {
  std::string config_path;
  std::vector<std::string> sets;
};

std::vector<std::pair<std::string, std::string>> parse_sets(const std::vector<std::string>& sets) {
  std::vector<std::pair<std::string, std::string>> out;
  for (const auto& s : sets) {
    const auto eq = s.find('=');
    if (eq == std::string::npos || eq == 0) throw CLI::ValidationError("--set", "expected key=value, got " + s);
    out.emplace_back(s.substr(0, eq), s.substr(eq + 1));
  }
  return out;
}

Settings settings_for(const CommonOptions& common) {
  const auto path = common.config_path.empty() ? std::nullopt : std::optional<fs::path>(common.config_path);
  return load_settings(path, parse_sets(common.sets));
}

// Owns the backends a command needs so fallbacks can point at siblings.
struct Backends {
  std::unique_ptr<ExtractiveBackend> extractive;
  std::unique_ptr<ChatBackend> chat;
  std::unique_ptr<EmbeddingBackend> embedder;
  std::unique_ptr<CaptionBackend> captioner;
};

std::unique_ptr<ChatBackend> make_chat(const BackendSettings& b, const Settings& s, Backends& owner) {
  if (b.backend == "extractive") return std::make_unique<ExtractiveBackend>();
  if (b.backend == "scripted") {
    if (b.fixture.empty()) throw Error(ErrorKind::InvalidArgument, "scripted chat backend needs a fixture file");
    ChatBackend* fallback = nullptr;
    if (s.llm_fallback == "extractive") {
      owner.extractive = std::make_unique<ExtractiveBackend>();
      fallback = owner.extractive.get();
    }
    const auto match = s.llm_match == "strict" ? ScriptedBackend::Match::Strict : ScriptedBackend::Match::Fuzzy;
    return std::make_unique<ScriptedBackend>(ScriptedBackend::from_file(b.fixture, match, fallback));
  }
  if (b.backend == "http") {
    return std::make_unique<HttpChatBackend>(HttpChatConfig{b.url, b.model, s.api_key, b.timeout_seconds});
  }
  throw Error(ErrorKind::InvalidArgument, "unknown chat backend \"" + b.backend + "\"");
}

std::unique_ptr<EmbeddingBackend> make_embedder(const Settings& s) {
  if (s.embedding.backend == "hash") return std::make_unique<HashEmbedder>(s.embedding_dim, s.embedding_seed);
  if (s.embedding.backend == "http") {
    HttpEmbedderConfig c;
    c.url = s.embedding.url;
    c.model = s.embedding.model;
    c.api_key = s.api_key;
    c.multimodal = s.embedding_multimodal;
    c.timeout_seconds = s.embedding.timeout_seconds;
    c.batch_size = s.embedding_batch_size;
    c.retry = s.retry_policy();
    return std::make_unique<HttpEmbedder>(std::move(c));
  }
  throw Error(ErrorKind::InvalidArgument, "unknown embedding backend \"" + s.embedding.backend + "\"");
}

std::unique_ptr<CaptionBackend> make_captioner(const Settings& s) {
  const auto& b = s.caption;
  if (b.backend == "none") return std::make_unique<ScriptedCaptioner>();
  if (b.backend == "scripted") return std::make_unique<ScriptedCaptioner>(ScriptedCaptioner::from_file(b.fixture));
  if (b.backend == "http") {
    return std::make_unique<HttpCaptioner>(HttpCaptionerConfig{b.url, b.model, s.api_key, b.timeout_seconds, s.retry_policy()});
  }
  throw Error(ErrorKind::InvalidArgument, "unknown caption backend \"" + b.backend + "\"");
}

void print_warnings(const std::vector<std::string>& warnings, std::ostream& err) {
  for (const auto& w : warnings) err << "warning: " << w << "\n";
}

void print_report(const ValidationReport& report, std::ostream& out) {
  for (const auto& i : report.issues) out << to_string(i.kind) << " " << i.subject << ": " << i.detail << "\n";
}

int cmd_ingest(const std::vector<std::string>& files, const std::string& kb_dir, const CommonOptions& common,
               std::ostream& out, std::ostream& err) {
  const auto settings = settings_for(common);
  Backends b;
  b.embedder = make_embedder(settings);
  b.captioner = make_captioner(settings);

  std::vector<ExtractionInterchange> docs;
  for (const auto& f : files) docs.push_back(load_interchange(f));
  Diagnostics diagnostics;
  const auto kb = build_kb(docs, settings.chunking, *b.embedder, *b.captioner, diagnostics);
  fs::create_directories(kb_dir);
  save_kb(materialize_assets(kb, kb_dir), kb_dir);

  print_warnings(diagnostics.warnings(), err);
  out << "ingested " << kb.documents().size() << " documents, " << kb.pages().size() << " pages, "
      << kb.chunks().size() << " chunks, " << kb.visuals().size() << " visuals into " << kb_dir << "\n";
  return kExitOk;
}

int cmd_write(const std::string& kb_dir, const std::string& query, const std::string& out_dir,
              const std::string& transcript_path, const CommonOptions& common, std::ostream& out, std::ostream& err) {
  const auto settings = settings_for(common);
  Backends b;
  b.chat = make_chat(settings.llm, settings, b);
  b.embedder = make_embedder(settings);
  const auto kb = load_kb(kb_dir);

  PipelineOptions options;
  options.retrieval = settings.retrieval;
  options.composer = settings.composer;
  options.citation = settings.citation;
  options.placement_capacity = settings.placement_capacity;
  options.allow_empty_sections = settings.allow_empty_sections;
  options.gen = settings.gen;
  options.retry = settings.retry_policy();

  const auto result = run_pipeline(query, kb, *b.chat, *b.embedder, options, fs::path(kb_dir));
  write_output(result, kb_dir, out_dir);

  if (!transcript_path.empty()) {
    std::ofstream t(transcript_path, std::ios::binary | std::ios::trunc);
    if (!t) throw Error(ErrorKind::Io, "cannot write " + transcript_path);
    for (const auto& x : result.transcript) {
      t << nlohmann::json{{"digest", ScriptedBackend::digest(x.prompt, ScriptedBackend::Match::Strict)},
                          {"prompt", x.prompt},
                          {"response", x.response},
                          {"backend", x.backend_id}}
               .dump()
        << "\n";
    }
  }

  print_warnings(result.report.warnings, err);
  print_report(result.report, out);
  out << "wrote " << (fs::path(out_dir) / "article.md").string() << " (" << result.plan.titles.size()
      << " sections, " << result.placement.assignments.size() << " visuals, " << result.citations.records.size()
      << " citations)\n";
  return result.report.ok() ? kExitOk : kExitValidation;
}

int cmd_validate(const std::string& out_dir, const std::string& kb_dir, std::ostream& out) {
  const auto report = validate_bundle(out_dir, load_kb(kb_dir));
  print_report(report, out);
  out << (report.ok() ? "valid" : "invalid: " + std::to_string(report.issues.size()) + " issues") << "\n";
  return report.ok() ? kExitOk : kExitValidation;
}

int cmd_eval(const std::string& out_dir, const CommonOptions& common, std::ostream& out, std::ostream& err) {
  const auto settings = settings_for(common);
  Backends b;
  const auto& judge_settings = settings.judge.backend.empty() ? settings.llm : settings.judge;
  b.chat = make_chat(judge_settings, settings, b);

  std::ifstream in(fs::path(out_dir) / "article.md", std::ios::binary);
  if (!in) throw Error(ErrorKind::Io, "cannot read " + (fs::path(out_dir) / "article.md").string());
  std::ostringstream ss;
  ss << in.rdbuf();
  const auto article = ss.str();
  const auto title = parse_article(article).title;

  Gateway judge(*b.chat, settings.gen, settings.retry_policy());
  const auto result = evaluate(article, judge, title.empty() ? std::string() : "Write a long-form article on: " + title);
  std::ofstream o(fs::path(out_dir) / "eval.json", std::ios::binary | std::ios::trunc);
  if (!o) throw Error(ErrorKind::Io, "cannot write eval.json");
  o << to_json(result).dump(2) << "\n";

  print_warnings(result.warnings, err);
  for (const auto& [name, score] : result.scores) out << name << ": " << score << "\n";
  return kExitOk;
}

void add_common(CLI::App* cmd, CommonOptions& common) {
  cmd->add_option("--config", common.config_path, "Config file (default: $DEEPWRITER_CONFIG or ./deepwriter.json)");
  cmd->add_option("--set", common.sets, "Override a config key, e.g. --set retrieval.k_text=12");
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"deepwriter: grounded long-form writing over a document knowledge base", "deepwriter"};
  app.require_subcommand(1);
  app.set_help_all_flag("--help-all");

  CommonOptions common;
  std::vector<std::string> eif_files;
  std::string kb_dir, out_dir, query, transcript;

  auto* ingest = app.add_subcommand("ingest", "Build a knowledge base from extraction interchange files");
  ingest->add_option("eif", eif_files, "Interchange JSON files")->required()->check(CLI::ExistingFile);
  ingest->add_option("--kb", kb_dir, "Knowledge base directory")->required();
  add_common(ingest, common);

  auto* write = app.add_subcommand("write", "Write an article for a query");
  write->add_option("--kb", kb_dir, "Knowledge base directory")->required()->check(CLI::ExistingDirectory);
  write->add_option("--query", query, "Writing request")->required();
  write->add_option("--out", out_dir, "Output bundle directory")->required();
  write->add_option("--transcript", transcript, "Also write every prompt/response pair as JSON lines");
  add_common(write, common);

  auto* validate = app.add_subcommand("validate", "Check a written bundle against its knowledge base");
  validate->add_option("--out", out_dir, "Output bundle directory")->required()->check(CLI::ExistingDirectory);
  validate->add_option("--kb", kb_dir, "Knowledge base directory")->required()->check(CLI::ExistingDirectory);

  auto* eval = app.add_subcommand("eval", "Score an article on the four rubric dimensions");
  eval->add_option("--out", out_dir, "Output bundle directory")->required()->check(CLI::ExistingDirectory);
  add_common(eval, common);

  std::vector<const char*> argv;
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitUsage;
  }

  try {
    if (ingest->parsed()) return cmd_ingest(eif_files, kb_dir, common, out, err);
    if (write->parsed()) return cmd_write(kb_dir, query, out_dir, transcript, common, out, err);
    if (validate->parsed()) return cmd_validate(out_dir, kb_dir, out);
    if (eval->parsed()) return cmd_eval(out_dir, common, out, err);
  } catch (const CLI::ParseError& e) {
    err << e.what() << "\n";
    return kExitUsage;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return kExitFatal;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kExitFatal;
  }
  return kExitUsage;
}

}  // namespace deepwriter::cli

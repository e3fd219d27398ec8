#include "cli.hpp"

#include <CLI11.hpp>

#include <fstream>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "gdl/chase.hpp"
#include "gdl/event.hpp"
#include "gdl/io.hpp"
#include "gdl/pdb.hpp"
#include "gdl/program.hpp"
#include "gdl/query.hpp"

namespace gdl::cli {

namespace {

using nlohmann::json;

struct Config {
  std::string schema;
  std::string program;
  std::vector<std::string> edb;
  std::string table;
  std::string query;
  std::string event;
  std::uint64_t samples = 0;
  std::uint64_t seed = kDefaultSeed;
  std::uint64_t budget = 1'000'000;
  std::string policy = "first";
  double confidence = 0.95;
  std::string trace;
  std::string out;
  std::string format = "json";
  std::vector<std::string> group_by;
  std::string value;
  unsigned threads = 0;
};

std::shared_ptr<const Schema> load_schema(const Config& c) {
  return std::make_shared<const Schema>(parse_schema_json(read_file(c.schema)));
}

std::shared_ptr<const CheckedProgram> load_program(const Config& c,
                                                   std::shared_ptr<const Schema> schema) {
  Program p = parse_program(read_file(c.program));
  return std::make_shared<const CheckedProgram>(validate_program(p, std::move(schema)));
}

Instance load_edb(const Config& c, std::shared_ptr<const Schema> schema) {
  Instance edb(std::move(schema), InstanceMode::Bag);
  for (const auto& path : c.edb) load_instance_file(edb, path);
  return edb;
}

SourceOptions source_options(const Config& c) {
  return {c.budget, Policy::from_name(c.policy, c.seed)};
}

WorldSource make_source(const Config& c, const std::shared_ptr<const Schema>& schema) {
  if (!c.table.empty()) {
    auto table =
        std::make_shared<const ProbTable>(parse_prob_table_json(read_file(c.table), schema));
    if (c.program.empty()) return WorldSource::table(std::move(table));
    if (!c.edb.empty()) {
      throw Error(ErrorKind::InvalidArgument, "--edb cannot be combined with --table");
    }
    return WorldSource::composed(std::move(table), load_program(c, schema), source_options(c));
  }
  if (c.program.empty()) {
    throw Error(ErrorKind::InvalidArgument, "a source needs --table, --program, or both");
  }
  auto program = load_program(c, schema);
  return WorldSource::generative(program, load_edb(c, schema), source_options(c));
}

json facts_json(const Instance& inst) { return instance_to_json(inst); }

std::string facts_text(const Instance& inst) {
  std::string s;
  for (const auto& [fact, count] : inst.facts()) {
    for (std::uint64_t i = 0; i < count; ++i) s += to_string(fact) + "\n";
  }
  return s;
}

// Writes to --out when given, else to the caller's stream.
class Sink {
 public:
  Sink(const std::string& path, std::ostream& fallback) : stream_(&fallback) {
    if (!path.empty()) {
      file_.open(path, std::ios::binary | std::ios::trunc);
      if (!file_) throw Error(ErrorKind::Io, "cannot write '" + path + "'");
      stream_ = &file_;
    }
  }
  std::ostream& operator*() { return *stream_; }

 private:
  std::ofstream file_;
  std::ostream* stream_;
};

int cmd_check(const Config& c, std::ostream& out) {
  auto schema = load_schema(c);
  auto program = load_program(c, schema);
  Sink sink(c.out, out);
  std::size_t rules = program->rules().size();
  std::size_t sites = program->dist_sites();
  if (c.format == "text") {
    *sink << "ok: " << rules << " rule occurrence" << (rules == 1 ? "" : "s") << ", " << sites
          << " distribution site" << (sites == 1 ? "" : "s") << "\n";
    auto list = [](const std::vector<std::string>& v) {
      std::string s;
      for (const auto& x : v) s += (s.empty() ? "" : ", ") + x;
      return s.empty() ? std::string("(none)") : s;
    };
    *sink << "intensional: " << list(program->intensional()) << "\n";
    *sink << "extensional: " << list(program->extensional()) << "\n";
    return kOk;
  }
  json rules_json = json::array();
  for (const auto& r : program->rules()) {
    rules_json.push_back({{"occurrence_id", r.occurrence_id},
                          {"rule", to_string(r.rule)},
                          {"head_variables", r.head_var_names()},
                          {"dist_sites", r.dist_sites}});
  }
  json report{{"format_version", kFormatVersion},
              {"rule_occurrences", rules},
              {"dist_sites", sites},
              {"intensional", program->intensional()},
              {"extensional", program->extensional()},
              {"rules", rules_json}};
  *sink << report.dump() << "\n";
  return kOk;
}

int cmd_sample(const Config& c, std::ostream& out) {
  auto schema = load_schema(c);
  WorldSource source = make_source(c, schema);
  std::ofstream trace_file;
  std::function<void(const TraceEvent&)> trace;
  if (!c.trace.empty()) {
    trace_file.open(c.trace, std::ios::binary | std::ios::trunc);
    if (!trace_file) throw Error(ErrorKind::Io, "cannot write '" + c.trace + "'");
    trace = [&](const TraceEvent& e) {
      json line{{"world", e.world},
                {"step", e.step},
                {"occurrence_id", e.occurrence_id},
                {"head_sig", to_hex(e.head_sig)},
                {"fact", fact_to_json(e.fact)},
                {"new", e.is_new}};
      trace_file << line.dump() << "\n";
    };
  }
  Sink sink(c.out, out);
  std::uint64_t n = c.samples == 0 ? 1 : c.samples;
  for (std::uint64_t w = 0; w < n; ++w) {
    WorldResult r = sample_world(source, c.seed, w, trace);
    if (c.format == "text") {
      *sink << "# world " << w << " " << to_string(r.status) << " firings=" << r.firings;
      if (!r.failure.empty()) *sink << " failure=" << r.failure;
      *sink << "\n" << facts_text(r.instance);
      continue;
    }
    json line{{"world", w},
              {"status", std::string(to_string(r.status))},
              {"firings", r.firings},
              {"facts", facts_json(r.instance)}};
    if (!r.failure.empty()) line["failure"] = r.failure;
    *sink << line.dump() << "\n";
  }
  return kOk;
}

json tally_json(const WorldTally& t) {
  return {{"n", t.n},
          {"n_effective", t.effective()},
          {"censored", t.censored},
          {"failed", t.failed},
          {"censored_fraction", t.censored_fraction()},
          {"failed_fraction", t.failed_fraction()}};
}

int cmd_estimate(const Config& c, std::ostream& out) {
  if (c.event.empty() && c.value.empty()) {
    throw Error(ErrorKind::InvalidArgument, "estimate needs --event, or --query with --value");
  }
  if (!c.value.empty() && c.query.empty()) {
    throw Error(ErrorKind::InvalidArgument, "--value needs --query");
  }
  auto schema = load_schema(c);
  WorldSource source = make_source(c, schema);
  std::optional<QueryPlan> view;
  if (!c.query.empty()) view = parse_query(read_file(c.query), source.world_schema());
  std::optional<EventExpr> event;
  if (!c.event.empty()) event = parse_event(read_file(c.event));

  EstimateOptions opts{c.samples == 0 ? 10'000 : c.samples, c.seed, c.confidence, c.threads};
  json report{{"format_version", kFormatVersion},
              {"seed", c.seed},
              {"samples", opts.samples},
              {"confidence", c.confidence}};
  try {
    if (event) {
      EventReport r = estimate_event(source, view, *event, opts);
      report.update(tally_json(r.tally));
      report["successes"] = r.successes;
      report["point"] = r.conditional.point;
      report["ci"] = {r.conditional.ci_low, r.conditional.ci_high};
      report["conditional"] = estimate_to_json(r.conditional);
      report["pessimistic"] = estimate_to_json(r.pessimistic);
      report["optimistic"] = estimate_to_json(r.optimistic);
    }
    if (!c.value.empty()) {
      MomentsReport m = estimate_group_moments(source, *view, c.group_by, c.value, opts);
      report.update(tally_json(m.tally));
      json groups = json::array();
      for (const auto& g : m.groups) {
        json key = json::array();
        for (const auto& v : g.key) key.push_back(value_to_json(v));
        groups.push_back({{"key", key},
                          {"worlds", g.worlds},
                          {"mean", estimate_to_json(g.mean)},
                          {"variance", estimate_to_json(g.variance)}});
      }
      report["group_by"] = c.group_by;
      report["value"] = c.value;
      report["groups"] = groups;
    }
  } catch (const EstimationError& e) {
    report.update(tally_json(e.tally()));
    report["error"] = std::string(to_string(e.kind()));
    report["message"] = e.detail();
    Sink sink(c.out, out);
    *sink << (c.format == "text" ? report.dump(2) : report.dump()) << "\n";
    throw;
  }
  Sink sink(c.out, out);
  *sink << (c.format == "text" ? report.dump(2) : report.dump()) << "\n";
  return kOk;
}

int cmd_query(const Config& c, std::ostream& out) {
  auto schema = load_schema(c);
  QueryPlan plan = parse_query(read_file(c.query), schema);
  Instance world = load_edb(c, schema);
  Instance result = eval_query(plan, world);
  Sink sink(c.out, out);
  if (c.format == "text") {
    *sink << facts_text(result);
    return kOk;
  }
  json attrs = json::array();
  for (const auto& a : plan.output_schema()->relations().front().attrs) {
    attrs.push_back({{"name", a.name}, {"type", std::string(to_string(a.type))}});
  }
  json report{{"format_version", kFormatVersion},
              {"relation", plan.output_relation()},
              {"attrs", attrs},
              {"facts", facts_json(result)}};
  *sink << report.dump() << "\n";
  return kOk;
}

int cmd_datalog(const Config& c, std::ostream& out) {
  auto schema = load_schema(c);
  auto program = load_program(c, schema);
  Instance edb = load_edb(c, schema);
  DatalogResult r = run_deterministic_datalog(*program, edb, c.budget);
  Sink sink(c.out, out);
  if (c.format == "text") {
    *sink << "# " << to_string(r.status) << " derived=" << r.derived;
    if (!r.failure.empty()) *sink << " failure=" << r.failure;
    *sink << "\n" << facts_text(r.instance);
    return kOk;
  }
  json report{{"format_version", kFormatVersion},
              {"status", std::string(to_string(r.status))},
              {"derived", r.derived},
              {"facts", facts_json(r.instance)}};
  if (!r.failure.empty()) report["failure"] = r.failure;
  *sink << report.dump() << "\n";
  return kOk;
}

}  // namespace

int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  Config c;
  CLI::App app{"Generative Datalog and Monte Carlo probabilistic database tool", "gdl"};
  app.require_subcommand(1);

  auto add_schema = [&](CLI::App* sub) {
    sub->add_option("--schema", c.schema, "Schema JSON file")->required()->check(CLI::ExistingFile);
  };
  auto add_output = [&](CLI::App* sub) {
    sub->add_option("--out", c.out, "Write the report here instead of stdout");
    sub->add_option("--format", c.format, "Output format")
        ->check(CLI::IsMember({"json", "text"}));
  };
  auto add_source = [&](CLI::App* sub) {
    sub->add_option("--program", c.program, "Program file")->check(CLI::ExistingFile);
    sub->add_option("--edb", c.edb, "Input facts (.json or .csv); repeatable")
        ->check(CLI::ExistingFile);
    sub->add_option("--table", c.table, "Probabilistic table JSON")->check(CLI::ExistingFile);
    sub->add_option("--seed", c.seed, "Global seed");
    sub->add_option("--budget", c.budget, "Firing budget per world")
        ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()));
    sub->add_option("--policy", c.policy, "Firing order policy")
        ->check(CLI::IsMember({"first", "last", "shuffled"}));
  };

  auto* check = app.add_subcommand("check", "Parse and validate a program");
  add_schema(check);
  check->add_option("--program", c.program, "Program file")->required()->check(CLI::ExistingFile);
  add_output(check);

  auto* sample = app.add_subcommand("sample", "Sample possible worlds as JSON lines");
  add_schema(sample);
  add_source(sample);
  sample->add_option("--samples", c.samples, "Number of worlds (default 1)")
      ->check(CLI::PositiveNumber);
  sample->add_option("--trace", c.trace, "Write one JSON line per firing to this file");
  add_output(sample);

  auto* estimate = app.add_subcommand("estimate", "Estimate an event probability or group moments");
  add_schema(estimate);
  add_source(estimate);
  estimate->add_option("--query", c.query, "Query applied to each world")
      ->check(CLI::ExistingFile);
  estimate->add_option("--event", c.event, "Event file")->check(CLI::ExistingFile);
  estimate->add_option("--samples", c.samples, "Number of worlds (default 10000)")
      ->check(CLI::PositiveNumber);
  estimate->add_option("--confidence", c.confidence, "Confidence level")
      ->check(CLI::Range(0.0, 1.0));
  estimate->add_option("--group-by", c.group_by, "Group attributes of the query output")
      ->delimiter(',');
  estimate->add_option("--value", c.value, "Numeric attribute whose moments are estimated");
  estimate->add_option("--threads", c.threads, "Worker threads (0 = all cores)");
  add_output(estimate);

  auto* query = app.add_subcommand("query", "Evaluate a query on one instance");
  add_schema(query);
  query->add_option("--query", c.query, "Query file")->required()->check(CLI::ExistingFile);
  query->add_option("--edb", c.edb, "Input facts (.json or .csv); repeatable")
      ->check(CLI::ExistingFile);
  add_output(query);

  auto* datalog = app.add_subcommand("datalog", "Compute the fixpoint of a distribution-free program");
  add_schema(datalog);
  datalog->add_option("--program", c.program, "Program file")->required()->check(CLI::ExistingFile);
  datalog->add_option("--edb", c.edb, "Input facts (.json or .csv); repeatable")
      ->check(CLI::ExistingFile);
  datalog->add_option("--budget", c.budget, "Maximum number of derived facts")
      ->check(CLI::Range(std::uint64_t{1}, std::numeric_limits<std::uint64_t>::max()));
  add_output(datalog);

  std::vector<const char*> argv{"gdl"};
  for (const auto& a : args) argv.push_back(a.c_str());
  try {
    app.parse(static_cast<int>(argv.size()), argv.data());
  } catch (const CLI::Success&) {
    out << app.help();
    return kOk;
  } catch (const CLI::ParseError& e) {
    // A missing input file is an I/O problem, not a usage problem.
    std::string what = e.what();
    err << "error: " << what << "\n";
    bool missing_file = what.find("File does not exist") != std::string::npos;
    return missing_file ? kIoError : kValidationError;
  }
  if (c.confidence <= 0.0 || c.confidence >= 1.0) {
    err << "error: --confidence must lie strictly between 0 and 1\n";
    return kValidationError;
  }

  try {
    if (*check) return cmd_check(c, out);
    if (*sample) return cmd_sample(c, out);
    if (*estimate) return cmd_estimate(c, out);
    if (*query) return cmd_query(c, out);
    if (*datalog) return cmd_datalog(c, out);
  } catch (const EstimationError& e) {
    err << "error: " << e.what() << "\n";
    return kEstimationImpossible;
  } catch (const Error& e) {
    err << "error: " << e.what() << "\n";
    return e.kind() == ErrorKind::Io ? kIoError : kValidationError;
  } catch (const nlohmann::json::exception& e) {
    err << "error: malformed input: " << e.what() << "\n";
    return kValidationError;
  }
  return kValidationError;
}

}  // namespace gdl::cli

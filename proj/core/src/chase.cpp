#include "gdl/chase.hpp"

#include <algorithm>
#include <optional>

#include "fact_store.hpp"
#include "head_eval.hpp"

namespace gdl {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

}  // namespace

Policy Policy::from_name(std::string_view name, std::uint64_t seed) {
  if (name == "first") return first();
  if (name == "last") return last();
  if (name == "shuffled") return shuffled(seed);
  throw Error(ErrorKind::InvalidArgument,
              "unknown policy '" + std::string(name) + "'; expected first, last, or shuffled");
}

std::size_t Policy::choose(std::span<const FiringKey> sorted, std::uint64_t firings) const {
  if (sorted.empty()) throw Error(ErrorKind::InvalidArgument, "no applicable keys to choose from");
  switch (kind_) {
    case Kind::First: return 0;
    case Kind::Last: return sorted.size() - 1;
    case Kind::Shuffled: return splitmix64(seed_ ^ splitmix64(firings)) % sorted.size();
  }
  return 0;
}

std::string Policy::name() const {
  switch (kind_) {
    case Kind::First: return "first";
    case Kind::Last: return "last";
    case Kind::Shuffled: return "shuffled";
  }
  return "first";
}

std::string_view to_string(ChaseStatus status) {
  switch (status) {
    case ChaseStatus::Running: return "running";
    case ChaseStatus::Fixpoint: return "fixpoint";
    case ChaseStatus::Censored: return "censored";
    case ChaseStatus::Failed: return "failed";
  }
  return "running";
}

Key128 site_stream_key(const WorldContext& ctx, const FiringKey& key, std::uint64_t site) {
  std::string bytes;
  bytes.reserve(33 + key.head_sig.size());
  bytes.push_back('\x01');
  append_u64_be(bytes, ctx.global_seed);
  append_u64_be(bytes, ctx.world_index);
  append_u64_be(bytes, key.head_sig.size());
  bytes += key.head_sig;
  append_u64_be(bytes, site);
  return stable_hash128(bytes);
}

// ---------------------------------------------------------------------------

struct ChaseAccess {
  static detail::FactStore& store(ChaseState& s) { return *s.store_; }
  static std::vector<FiringKey>& pending(ChaseState& s) { return s.pending_; }
  static std::set<FiringKey>& fired(ChaseState& s) { return s.fired_; }
  static void after_insert(ChaseState& s, std::size_t rel, std::size_t row) {
    s.discover_from(rel, row);
  }
  static void set_failed(ChaseState& s, std::string why) {
    s.status_ = ChaseStatus::Failed;
    s.failure_ = std::move(why);
  }
  static void count_firing(ChaseState& s) { ++s.firings_; }
  static void set_status(ChaseState& s, ChaseStatus st) { s.status_ = st; }
};

namespace {

std::string key_from_binding(const CheckedRule& rule, const detail::Binding& b) {
  std::string sig;
  append_u64_be(sig, rule.occurrence_id);
  for (auto v : rule.head_vars) encode_value(sig, *b[v]);
  return sig;
}

}  // namespace

ChaseState::ChaseState(const CheckedProgram& program, const Instance& edb)
    : program_(&program), store_(std::make_unique<detail::FactStore>(program.schema())) {
  for (const auto& [fact, count] : edb.facts()) {
    (void)count;
    if (program.is_intensional(fact.relation)) {
      throw Error(ErrorKind::EDBSchemaMismatch,
                  "input holds facts of intensional relation '" + fact.relation + "'");
    }
    try {
      check_fact(program.schema(), fact);
    } catch (const Error& e) {
      throw Error(ErrorKind::EDBSchemaMismatch, e.detail());
    }
    store_->insert(*store_->relation_id(fact.relation), fact.values);
  }
  for (const auto& rule : program.rules()) plans_.push_back(detail::make_join_plan(*store_, rule));
  for (const auto& plan : plans_) {
    detail::for_each_match(*store_, plan, std::nullopt, nullptr, [&](const detail::Binding& b) {
      add_pending({plan.rule->occurrence_id, key_from_binding(*plan.rule, b)});
    });
  }
}

ChaseState::~ChaseState() = default;
ChaseState::ChaseState(ChaseState&&) noexcept = default;
ChaseState& ChaseState::operator=(ChaseState&&) noexcept = default;

void ChaseState::add_pending(FiringKey key) {
  if (fired_.contains(key)) return;
  auto it = std::lower_bound(pending_.begin(), pending_.end(), key);
  if (it != pending_.end() && *it == key) return;
  pending_.insert(it, std::move(key));
}

void ChaseState::discover_from(std::size_t rel, std::size_t row_index) {
  const detail::Row& row = store_->rows(rel)[row_index];
  for (const auto& plan : plans_) {
    for (std::size_t a = 0; a < plan.atom_rel.size(); ++a) {
      if (plan.atom_rel[a] != rel) continue;
      detail::for_each_match(*store_, plan, a, &row, [&](const detail::Binding& b) {
        add_pending({plan.rule->occurrence_id, key_from_binding(*plan.rule, b)});
      });
    }
  }
}

Instance ChaseState::instance() const {
  return store_->to_instance(program_->schema_ptr(), [](const std::string&) { return true; });
}

Instance ChaseState::intensional_instance() const {
  return store_->to_instance(program_->schema_ptr(),
                             [&](const std::string& r) { return program_->is_intensional(r); });
}

// ---------------------------------------------------------------------------

namespace {

// Nested-loop enumeration over the plain instance, kept independent of the
// indexed store.
void naive_matches(const CheckedRule& rule, const Instance& inst, std::size_t depth,
                   std::vector<std::optional<Value>>& env, std::vector<FiringKey>& out) {
  if (depth == rule.body.size()) {
    std::vector<Value> head;
    for (auto v : rule.head_vars) head.push_back(*env[v]);
    out.push_back({rule.occurrence_id, signature_from_values(rule.occurrence_id, head)});
    return;
  }
  const CheckedAtom& atom = rule.body[depth];
  for (const Fact* f : inst.facts_of(atom.relation)) {
    auto saved = env;
    bool ok = true;
    for (std::size_t i = 0; i < atom.slots.size() && ok; ++i) {
      const auto& slot = atom.slots[i];
      if (!slot.is_var) {
        ok = f->values[i] == slot.constant;
      } else if (env[slot.var]) {
        ok = *env[slot.var] == f->values[i];
      } else {
        env[slot.var] = f->values[i];
      }
    }
    if (ok) naive_matches(rule, inst, depth + 1, env, out);
    env = std::move(saved);
  }
}

}  // namespace

std::vector<FiringKey> applicable_keys(const ChaseState& state, const CheckedProgram& program) {
  Instance inst = state.instance();
  std::vector<FiringKey> all;
  for (const auto& rule : program.rules()) {
    std::vector<std::optional<Value>> env(rule.variables.size());
    naive_matches(rule, inst, 0, env, all);
  }
  std::sort(all.begin(), all.end());
  all.erase(std::unique(all.begin(), all.end()), all.end());
  std::erase_if(all, [&](const FiringKey& k) { return state.fired().contains(k); });
  return all;
}

FireOutcome fire(ChaseState& state, const FiringKey& requested, const CheckedProgram& program,
                 const WorldContext& ctx) {
  if (state.status() == ChaseStatus::Failed) {
    throw Error(ErrorKind::InvalidArgument, "cannot fire in a failed chase state");
  }
  if (state.fired().contains(requested)) {
    throw Error(ErrorKind::InvalidArgument,
                "key " + to_hex(requested.head_sig) + " already fired");
  }
  auto& pending = ChaseAccess::pending(state);
  auto it = std::lower_bound(pending.begin(), pending.end(), requested);
  if (it == pending.end() || !(*it == requested)) {
    throw Error(ErrorKind::InvalidArgument,
                "key " + to_hex(requested.head_sig) + " is not applicable");
  }
  // `requested` may point into pending, so take the key out before erasing.
  const FiringKey key = std::move(*it);
  pending.erase(it);
  ChaseAccess::fired(state).insert(key);
  ChaseAccess::count_firing(state);

  const CheckedRule& rule = program.rules().at(key.occurrence_id);
  DecodedSignature decoded = decode_signature(key.head_sig);
  std::vector<Value> env(rule.variables.size());
  for (std::size_t k = 0; k < rule.head_vars.size(); ++k) {
    env[rule.head_vars[k]] = decoded.head_values.at(k);
  }

  auto draw = [&](const Term& t, std::span<const Value> params) -> Value {
    try {
      validate_params(*t.spec, params);
    } catch (const Error& e) {
      throw Error(ErrorKind::RuntimeParamError, e.detail());
    }
    RngStream stream(site_stream_key(ctx, key, static_cast<std::uint64_t>(t.site)));
    return sample(*t.spec, params, stream);
  };

  FireOutcome out;
  try {
    std::vector<Value> values;
    values.reserve(rule.rule.head.args.size());
    for (std::size_t i = 0; i < rule.rule.head.args.size(); ++i) {
      values.push_back(coerce(detail::eval_term(rule.rule.head.args[i], env, draw),
                              rule.head_attr_types[i]));
    }
    out.fact = Fact{rule.rule.head.relation, values};
    auto& store = ChaseAccess::store(state);
    std::size_t rel = *store.relation_id(rule.rule.head.relation);
    out.inserted = store.insert(rel, std::move(values));
    if (out.inserted) ChaseAccess::after_insert(state, rel, store.rows(rel).size() - 1);
  } catch (const Error& e) {
    out.failed = true;
    out.fact = Fact{};
    ChaseAccess::set_failed(state, e.what());
  }
  return out;
}

WorldResult run_chase(const CheckedProgram& program, const Instance& edb, const WorldContext& ctx,
                      const ChaseOptions& options) {
  ChaseState state(program, edb);
  while (state.status() == ChaseStatus::Running) {
    auto pending = state.pending();
    if (pending.empty()) {
      ChaseAccess::set_status(state, ChaseStatus::Fixpoint);
      break;
    }
    if (state.firings() >= options.budget) {
      ChaseAccess::set_status(state, ChaseStatus::Censored);
      break;
    }
    std::uint64_t step = state.firings();
    FiringKey key = pending[options.policy.choose(pending, step)];
    FireOutcome out = fire(state, key, program, ctx);
    if (options.trace && !out.failed) {
      options.trace(TraceEvent{ctx.world_index, step, key.occurrence_id, key.head_sig,
                               out.fact, out.inserted});
    }
  }
  return WorldResult{state.intensional_instance(), state.status(), state.firings(),
                     state.failure()};
}

}  // namespace gdl

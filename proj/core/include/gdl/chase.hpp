#pragma once

#include <compare>
#include <cstdint>
#include <functional>
#include <memory>
#include <set>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "gdl/instance.hpp"
#include "gdl/program.hpp"

namespace gdl {

namespace detail {
class FactStore;
struct JoinPlan;
}  // namespace detail

// The unit of "fire at most once": a rule occurrence together with the
// canonical encoding of its head-variable instantiation.
struct FiringKey {
  std::uint64_t occurrence_id = 0;
  std::string head_sig;

  friend bool operator==(const FiringKey&, const FiringKey&) = default;
  friend std::strong_ordering operator<=>(const FiringKey&, const FiringKey&) = default;
};

// Picks which applicable key fires next. Must be a deterministic function of
// the sorted applicable list and the number of firings so far.
class Policy {
 public:
  enum class Kind { First, Last, Shuffled };

  static Policy first() { return Policy(Kind::First, 0); }
  static Policy last() { return Policy(Kind::Last, 0); }
  static Policy shuffled(std::uint64_t seed) { return Policy(Kind::Shuffled, seed); }
  // "first", "last", or "shuffled"; throws InvalidArgument otherwise.
  static Policy from_name(std::string_view name, std::uint64_t seed);

  // Index into `sorted`, which must be nonempty.
  std::size_t choose(std::span<const FiringKey> sorted, std::uint64_t firings) const;

  Kind kind() const { return kind_; }
  std::string name() const;

 private:
  Policy(Kind kind, std::uint64_t seed) : kind_(kind), seed_(seed) {}
  Kind kind_;
  std::uint64_t seed_;
};

enum class ChaseStatus { Running, Fixpoint, Censored, Failed };
std::string_view to_string(ChaseStatus status);

struct WorldContext {
  std::uint64_t global_seed = 0;
  std::uint64_t world_index = 0;
};

// Stream key for the sampling site `site` of the firing `key`:
// stable_hash128(0x01 ++ seed ++ world ++ len(head_sig) ++ head_sig ++ site),
// integers as 8-byte big-endian.
Key128 site_stream_key(const WorldContext& ctx, const FiringKey& key, std::uint64_t site);

// Chase state for one world: the current set instance (EDB plus derived IDB
// facts), the fired keys, and the incrementally maintained applicable keys.
// Holds a reference to the program, which must outlive it.
class ChaseState {
 public:
  // Errors: EDBSchemaMismatch when `edb` holds intensional facts or uses a
  // different schema shape.
  ChaseState(const CheckedProgram& program, const Instance& edb);
  ~ChaseState();
  ChaseState(ChaseState&&) noexcept;
  ChaseState& operator=(ChaseState&&) noexcept;

  Instance instance() const;
  Instance intensional_instance() const;

  const std::set<FiringKey>& fired() const { return fired_; }
  std::uint64_t firings() const { return firings_; }
  ChaseStatus status() const { return status_; }
  const std::string& failure() const { return failure_; }

  // Applicable unfired keys, sorted by (occurrence_id, head_sig).
  std::span<const FiringKey> pending() const { return pending_; }

  const CheckedProgram& program() const { return *program_; }

 private:
  friend struct ChaseAccess;

  void discover_from(std::size_t rel, std::size_t row_index);
  void add_pending(FiringKey key);

  const CheckedProgram* program_;
  std::unique_ptr<detail::FactStore> store_;
  std::vector<detail::JoinPlan> plans_;
  std::set<FiringKey> fired_;
  std::vector<FiringKey> pending_;
  std::uint64_t firings_ = 0;
  ChaseStatus status_ = ChaseStatus::Running;
  std::string failure_;
};

// Recomputes the applicable keys from scratch with a plain nested-loop join
// over state.instance(). Observably equal to state.pending().
std::vector<FiringKey> applicable_keys(const ChaseState& state, const CheckedProgram& program);

struct FireOutcome {
  Fact fact;            // the generated fact (empty relation on failure)
  bool inserted = false;  // false if the fact was already present
  bool failed = false;
};

// Fires `key`: evaluates the head under the decoded instantiation, drawing
// each Dist site from its keyed stream, and adds the fact by set union. The key
// is consumed even when the fact already exists. A runtime parameter error
// marks the state failed.
FireOutcome fire(ChaseState& state, const FiringKey& key, const CheckedProgram& program,
                 const WorldContext& ctx);

struct TraceEvent {
  std::uint64_t world = 0;
  std::uint64_t step = 0;
  std::uint64_t occurrence_id = 0;
  std::string head_sig;
  Fact fact;
  bool is_new = false;
};

struct ChaseOptions {
  std::uint64_t budget = 1'000'000;
  Policy policy = Policy::first();
  std::function<void(const TraceEvent&)> trace;
};

struct WorldResult {
  Instance instance;  // intensional relations (chase) or the sampled table world
  ChaseStatus status = ChaseStatus::Fixpoint;
  std::uint64_t firings = 0;
  std::string failure;
};

WorldResult run_chase(const CheckedProgram& program, const Instance& edb,
                      const WorldContext& ctx, const ChaseOptions& options = {});

struct DatalogResult {
  Instance instance;  // intensional relations
  ChaseStatus status = ChaseStatus::Fixpoint;
  std::uint64_t derived = 0;
  std::string failure;
};

// Semi-naive fixpoint for distribution-free programs. `budget` bounds the
// number of derived facts; exceeding it yields Censored.
// Errors: NondeterministicProgram if any Dist site is present.
DatalogResult run_deterministic_datalog(const CheckedProgram& program, const Instance& edb,
                                        std::uint64_t budget = 10'000'000);

}  // namespace gdl

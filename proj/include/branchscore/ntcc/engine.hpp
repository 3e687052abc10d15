#pragma once

#include "branchscore/ntcc/agent.hpp"
#include "branchscore/store/store.hpp"

#include <cstdint>
#include <deque>
#include <map>
#include <optional>
#include <random>
#include <set>
#include <stdexcept>
#include <unordered_map>
#include <string>
#include <vector>

namespace branchscore::ntcc {

/// Fatal fault inside a time unit.
class EngineError : public std::runtime_error {
public:
  EngineError(const std::string &what, std::uint64_t unit_index,
              std::optional<Constraint> offending = std::nullopt)
      : std::runtime_error(what), unit(unit_index),
        constraint(std::move(offending)) {}
  std::uint64_t unit;
  std::optional<Constraint> constraint;
};

struct Program {
  store::Vocabulary vocab;
  std::vector<Definition> defs;
  AgentPtr main;
  /// Variables reported in every TickResult, in this order.
  std::vector<VarId> observables;
};

struct Diagnostic {
  std::string message;
  friend bool operator==(const Diagnostic &, const Diagnostic &) = default;
};

/// Empty iff every call resolves with matching arity and every recursive
/// cycle crosses a Next (or Unless, or Delay with positive literal ticks).
std::vector<Diagnostic> validate_program(const std::vector<Definition> &defs,
                                         const AgentPtr &main);

enum class SumPolicy { LowestIndex, SeededRandom };

struct EngineOptions {
  SumPolicy policy = SumPolicy::LowestIndex;
  std::uint64_t seed = 0;
  /// Max agent activations per unit before the unit is aborted.
  std::uint64_t activation_cap = 50'000'000;
};

struct Observation {
  VarId var;
  std::optional<Value> value;
  friend bool operator==(const Observation &, const Observation &) = default;
};

struct FiredSum {
  std::size_t sum;    // registration order within the unit
  std::size_t branch; // index into the Sum's branches
  std::size_t enabled;
  friend bool operator==(const FiredSum &, const FiredSum &) = default;
};

struct TickResult {
  std::uint64_t unit = 0;
  std::vector<Observation> observables;
  std::vector<FiredSum> fired;
  std::vector<Event> events;
  std::vector<std::string> warnings;
  friend bool operator==(const TickResult &, const TickResult &) = default;
};

/// Residual execution state between time units. Copying an Engine copies
/// the whole configuration, so a run can be forked or replayed.
class Engine {
public:
  /// Throws std::invalid_argument if validate_program reports anything.
  Engine(std::shared_ptr<const Program> program, EngineOptions options = {});

  /// Runs one time unit with `env` told into the fresh store first.
  /// After an EngineError the engine is faulted and refuses further steps.
  TickResult step(const std::vector<Constraint> &env = {});

  std::uint64_t unit() const { return unit_; }
  /// Quiesced store of the last completed unit.
  const store::Store &store() const { return store_; }
  const Program &program() const { return *program_; }
  /// True if nothing is scheduled for any future unit.
  bool idle() const;

  struct Instance {
    const Agent *node = nullptr;
    std::shared_ptr<const std::vector<Value>> params;
  };

private:
  struct Ask {
    const Constraint *guard;
    Instance body;
    bool alive;
  };
  struct PendingSum {
    const Agent::Sum *sum;
    std::shared_ptr<const std::vector<Value>> params;
    std::vector<const Constraint *> guards;
  };
  struct PendingUnless {
    const Constraint *guard;
    Instance body;
  };

  TickResult step_unit(const std::vector<Constraint> &env);
  void activate(const Instance &inst);
  void run_fixpoint();
  void on_changed(VarId v);
  const Constraint *resolve(const Pattern &p, const Instance &inst);
  Value eval(const Term &t, const Instance &inst) const;
  void tell(const Constraint &c);

  std::shared_ptr<const Program> program_;
  EngineOptions options_;
  std::mt19937_64 rng_;
  store::Store store_;
  std::uint64_t unit_ = 0;
  bool faulted_ = false;
  std::unordered_map<std::string, std::size_t> def_index_;

  // Residual configuration.
  std::vector<Instance> next_unit_;
  std::map<std::uint64_t, std::vector<Instance>> future_;
  std::set<Value> held_;

  // Per-unit scratch.
  std::deque<Instance> agenda_;
  std::vector<Ask> asks_;
  std::vector<std::vector<std::uint32_t>> watchers_;
  std::vector<std::uint32_t> watched_;
  std::vector<PendingSum> sums_;
  std::vector<PendingUnless> unlesses_;
  std::deque<Constraint> scratch_constraints_;
  std::vector<VarId> changed_;
  std::uint64_t activations_ = 0;
  TickResult result_;
};

/// Folds step over `envs` (missing entries mean an empty environment).
std::vector<TickResult> run(std::shared_ptr<const Program> program,
                            const std::vector<std::vector<Constraint>> &envs,
                            std::size_t max_units, EngineOptions options = {});

} // namespace branchscore::ntcc

#include "branchscore/ntcc/engine.hpp"

#include <algorithm>

namespace branchscore::ntcc {

namespace {

std::string join(const std::vector<Diagnostic> &diags) {
  std::string out;
  for (const auto &d : diags)
    out += (out.empty() ? "" : "; ") + d.message;
  return out;
}

const std::shared_ptr<const std::vector<Value>> &no_params() {
  static const auto empty = std::make_shared<const std::vector<Value>>();
  return empty;
}

} // namespace

Engine::Engine(std::shared_ptr<const Program> program, EngineOptions options)
    : program_(std::move(program)), options_(options), rng_(options.seed) {
  if (!program_)
    throw std::invalid_argument("engine needs a program");
  if (auto diags = validate_program(program_->defs, program_->main); !diags.empty())
    throw std::invalid_argument("invalid program: " + join(diags));
  for (std::size_t i = 0; i < program_->defs.size(); ++i)
    def_index_.emplace(program_->defs[i].name, i);
  store_ = store::Store(program_->vocab);
  watchers_.resize(program_->vocab.size());
}

bool Engine::idle() const { return next_unit_.empty() && future_.empty(); }

Value Engine::eval(const Term &t, const Instance &inst) const {
  if (t.is_literal())
    return t.literal();
  try {
    return t.eval(*inst.params);
  } catch (const std::exception &e) {
    throw EngineError(std::string(e.what()) + " at unit " + std::to_string(unit_), unit_);
  }
}

const Constraint *Engine::resolve(const Pattern &p, const Instance &inst) {
  if (p.is_ground())
    return &p.ground();
  try {
    scratch_constraints_.push_back(p.instantiate(*inst.params));
  } catch (const std::exception &e) {
    throw EngineError(std::string(e.what()) + " at unit " + std::to_string(unit_), unit_);
  }
  return &scratch_constraints_.back();
}

void Engine::tell(const Constraint &c) {
  changed_.clear();
  try {
    store_.tell(c, &changed_);
  } catch (const store::InconsistencyError &e) {
    throw EngineError(std::string(e.what()) + " at unit " + std::to_string(unit_), unit_,
                      e.constraint);
  } catch (const store::StoreError &e) {
    throw EngineError(std::string(e.what()) + " at unit " + std::to_string(unit_), unit_, c);
  }
  for (auto v : changed_)
    on_changed(v);
}

void Engine::on_changed(VarId v) {
  for (auto id : watchers_[v.index]) {
    auto &ask = asks_[id];
    if (ask.alive && store_.entails(*ask.guard)) {
      ask.alive = false;
      agenda_.push_back(ask.body);
    }
  }
}

void Engine::activate(const Instance &inst) {
  if (++activations_ > options_.activation_cap)
    throw EngineError("activation cap exceeded at unit " + std::to_string(unit_), unit_);
  auto child = [&](const AgentPtr &a) { return Instance{a.get(), inst.params}; };

  std::visit(
      [&](const auto &n) {
        using T = std::decay_t<decltype(n)>;
        if constexpr (std::is_same_v<T, Agent::Skip>) {
        } else if constexpr (std::is_same_v<T, Agent::Tell>) {
          tell(*resolve(n.c, inst));
        } else if constexpr (std::is_same_v<T, Agent::When>) {
          const Constraint *guard = resolve(n.guard, inst);
          if (store_.entails(*guard)) {
            agenda_.push_back(child(n.body));
            return;
          }
          const auto id = static_cast<std::uint32_t>(asks_.size());
          asks_.push_back({guard, child(n.body), true});
          for (auto v : n.guard.vars()) {
            auto &w = watchers_.at(v.index);
            if (w.empty())
              watched_.push_back(v.index);
            w.push_back(id);
          }
        } else if constexpr (std::is_same_v<T, Agent::Unless>) {
          unlesses_.push_back({resolve(n.guard, inst), child(n.body)});
        } else if constexpr (std::is_same_v<T, Agent::Next>) {
          next_unit_.push_back(child(n.body));
        } else if constexpr (std::is_same_v<T, Agent::Delay>) {
          const Value d = eval(n.ticks, inst);
          if (d < 0)
            throw EngineError("negative delay at unit " + std::to_string(unit_), unit_);
          if (d == 0)
            agenda_.push_back(child(n.body));
          else if (d == 1)
            next_unit_.push_back(child(n.body));
          else
            future_[unit_ + static_cast<std::uint64_t>(d)].push_back(child(n.body));
        } else if constexpr (std::is_same_v<T, Agent::Par>) {
          for (const auto &item : n.items)
            agenda_.push_back(child(item));
        } else if constexpr (std::is_same_v<T, Agent::Sum>) {
          PendingSum ps{&n, inst.params, {}};
          ps.guards.reserve(n.branches.size());
          for (const auto &b : n.branches)
            ps.guards.push_back(resolve(b.guard, inst));
          sums_.push_back(std::move(ps));
        } else if constexpr (std::is_same_v<T, Agent::Bang>) {
          agenda_.push_back(child(n.body));
          next_unit_.push_back(inst);
        } else if constexpr (std::is_same_v<T, Agent::Call>) {
          auto it = def_index_.find(n.name);
          if (it == def_index_.end())
            throw EngineError("unresolved call " + n.name, unit_);
          const auto &def = program_->defs[it->second];
          if (n.args.empty()) {
            agenda_.push_back({def.body.get(), no_params()});
            return;
          }
          auto args = std::make_shared<std::vector<Value>>();
          args->reserve(n.args.size());
          for (const auto &a : n.args)
            args->push_back(eval(a, inst));
          agenda_.push_back({def.body.get(), std::move(args)});
        } else if constexpr (std::is_same_v<T, Agent::Emit>) {
          result_.events.push_back(n.event);
        } else if constexpr (std::is_same_v<T, Agent::Exclusive>) {
          const Value key = eval(n.key, inst);
          if (!held_.insert(key).second) {
            result_.warnings.push_back("instance already running, re-trigger ignored: " +
                                       (n.label.empty() ? std::to_string(key) : n.label));
            return;
          }
          agenda_.push_back(child(n.body));
        } else if constexpr (std::is_same_v<T, Agent::Release>) {
          held_.erase(eval(n.key, inst));
        }
      },
      inst.node->node);
}

void Engine::run_fixpoint() {
  while (!agenda_.empty()) {
    Instance inst = std::move(agenda_.front());
    agenda_.pop_front();
    activate(inst);
  }
}

TickResult Engine::step(const std::vector<Constraint> &env) {
  if (faulted_)
    throw EngineError("engine faulted at unit " + std::to_string(unit_) +
                          "; it cannot be stepped again",
                      unit_);
  try {
    return step_unit(env);
  } catch (...) {
    faulted_ = true;
    throw;
  }
}

TickResult Engine::step_unit(const std::vector<Constraint> &env) {
  result_ = TickResult{};
  result_.unit = unit_;
  store_.reset();
  store_.set_unit(unit_);
  activations_ = 0;

  for (const auto &c : env)
    tell(c);

  std::vector<Instance> scheduled;
  scheduled.swap(next_unit_);
  for (auto &inst : scheduled)
    agenda_.push_back(std::move(inst));
  if (auto it = future_.find(unit_); it != future_.end()) {
    for (auto &inst : it->second)
      agenda_.push_back(std::move(inst));
    future_.erase(it);
  }
  if (unit_ == 0 && program_->main)
    agenda_.push_back({program_->main.get(), no_params()});

  run_fixpoint();

  // Sum phase: one branch at a time, re-quiescing between firings.
  std::vector<bool> done(sums_.size(), false);
  for (;;) {
    done.resize(sums_.size(), false);
    std::optional<std::size_t> chosen_sum;
    std::vector<std::size_t> enabled;
    for (std::size_t i = 0; i < sums_.size() && !chosen_sum; ++i) {
      if (done[i])
        continue;
      for (std::size_t b = 0; b < sums_[i].guards.size(); ++b)
        if (store_.entails(*sums_[i].guards[b]))
          enabled.push_back(b);
      if (!enabled.empty())
        chosen_sum = i;
    }
    if (!chosen_sum)
      break;
    std::size_t branch = enabled.front();
    if (options_.policy == SumPolicy::SeededRandom && enabled.size() > 1) {
      std::uniform_int_distribution<std::size_t> pick(0, enabled.size() - 1);
      branch = enabled[pick(rng_)];
    }
    done[*chosen_sum] = true;
    result_.fired.push_back({*chosen_sum, branch, enabled.size()});
    const auto &ps = sums_[*chosen_sum];
    agenda_.push_back({ps.sum->branches[branch].body.get(), ps.params});
    run_fixpoint();
  }
  for (std::size_t i = 0; i < sums_.size(); ++i) {
    if (i < done.size() && done[i])
      continue;
    const auto &label = sums_[i].sum->label;
    result_.warnings.push_back("choice discarded, no guard entailed: " +
                               (label.empty() ? "sum #" + std::to_string(i) : label));
  }

  // Quiescence: unless c next P.
  for (const auto &u : unlesses_)
    if (!store_.entails(*u.guard))
      next_unit_.push_back(u.body);

  result_.observables.reserve(program_->observables.size());
  for (auto v : program_->observables)
    result_.observables.push_back({v, store_.value(v)});

  for (auto v : watched_)
    watchers_[v].clear();
  watched_.clear();
  asks_.clear();
  sums_.clear();
  unlesses_.clear();
  scratch_constraints_.clear();

  ++unit_;
  return std::move(result_);
}

std::vector<TickResult> run(std::shared_ptr<const Program> program,
                            const std::vector<std::vector<Constraint>> &envs,
                            std::size_t max_units, EngineOptions options) {
  if (max_units < 1)
    throw std::invalid_argument("max units must be at least 1");
  Engine engine(std::move(program), options);
  std::vector<TickResult> out;
  out.reserve(max_units);
  static const std::vector<Constraint> empty;
  for (std::size_t u = 0; u < max_units; ++u)
    out.push_back(engine.step(u < envs.size() ? envs[u] : empty));
  return out;
}

} // namespace branchscore::ntcc

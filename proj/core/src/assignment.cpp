#include "encircle/assignment.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <string>

#include "encircle/errors.hpp"

namespace encircle {

TaskTable TaskTable::empty(int owner, int num_targets, int num_drones) {
  TaskTable table;
  table.owner = owner;
  table.num_targets = num_targets;
  table.num_drones = num_drones;
  table.claims.assign(static_cast<std::size_t>(num_targets * num_drones), 0);
  table.bids.assign(static_cast<std::size_t>(num_drones), 0.0);
  table.versions.assign(static_cast<std::size_t>(num_drones), 0);
  return table;
}

bool TaskTable::claim(int target, int drone) const {
  return claims[static_cast<std::size_t>(target * num_drones + drone)] != 0;
}

void TaskTable::set_claim(int target, int drone, bool value) {
  claims[static_cast<std::size_t>(target * num_drones + drone)] = value ? 1 : 0;
}

int TaskTable::claim_count(int target) const {
  int n = 0;
  for (int g = 0; g < num_drones; ++g) n += claim(target, g) ? 1 : 0;
  return n;
}

int TaskTable::column_sum(int drone) const {
  int n = 0;
  for (int j = 0; j < num_targets; ++j) n += claim(j, drone) ? 1 : 0;
  return n;
}

std::optional<int> TaskTable::claimed_target(int drone) const {
  for (int j = 0; j < num_targets; ++j) {
    if (claim(j, drone)) return j;
  }
  return std::nullopt;
}

std::uint64_t TaskTable::hash() const {
  std::uint64_t h = 0xcbf29ce484222325ULL;
  for (std::uint8_t c : claims) {
    h ^= c;
    h *= 0x100000001b3ULL;
  }
  return h;
}

void TaskTable::check(int expected_targets, int expected_drones) const {
  if (num_targets != expected_targets || num_drones != expected_drones ||
      claims.size() != static_cast<std::size_t>(num_targets * num_drones) ||
      bids.size() != static_cast<std::size_t>(num_drones) ||
      versions.size() != static_cast<std::size_t>(num_drones)) {
    throw ProtocolError("task table from drone " + std::to_string(owner) +
                        " has malformed dimensions");
  }
  for (std::uint8_t c : claims) {
    if (c > 1) throw ProtocolError("task table entries must be 0 or 1");
  }
}

bool ScoreVector::contains(int target) const {
  return std::binary_search(targets.begin(), targets.end(), target);
}

namespace {

std::size_t score_index(const ScoreVector& scores, int target) {
  auto it = std::lower_bound(scores.targets.begin(), scores.targets.end(), target);
  if (it == scores.targets.end() || *it != target) {
    throw ArgumentError("target " + std::to_string(target) + " is not visible");
  }
  return static_cast<std::size_t>(it - scores.targets.begin());
}

}  // namespace

double ScoreVector::score(int target) const {
  const std::size_t idx = score_index(*this, target);
  return distance_reward[idx] + extra_reward[idx];
}

double& ScoreVector::extra(int target) { return extra_reward[score_index(*this, target)]; }

ScoreVector make_scores(std::span<const std::optional<double>> distances) {
  ScoreVector scores;
  for (std::size_t j = 0; j < distances.size(); ++j) {
    if (!distances[j]) continue;
    const double d = std::max(*distances[j], kMinAuctionDistance);
    scores.targets.push_back(static_cast<int>(j));
    scores.distance_reward.push_back(1.0 / d);
    scores.extra_reward.push_back(0.0);
  }
  return scores;
}

TaskTable auction_step(int drone, const TaskTable& table, const ScoreVector& scores) {
  if (table.column_sum(drone) != 0) {
    throw ProtocolError("drone " + std::to_string(drone) + " already holds a claim");
  }
  if (scores.size() == 0) return table;

  int best = scores.targets.front();
  double best_score = scores.score(best);
  for (int j : scores.targets) {
    const double c = scores.score(j);
    if (c > best_score) {
      best = j;
      best_score = c;
    }
  }
  TaskTable next = table;
  next.set_claim(best, drone, true);
  next.bids[static_cast<std::size_t>(drone)] = best_score;
  ++next.versions[static_cast<std::size_t>(drone)];
  return next;
}

namespace {

void copy_column(TaskTable& dst, const TaskTable& src, int g) {
  for (int j = 0; j < dst.num_targets; ++j) dst.set_claim(j, g, src.claim(j, g));
  dst.bids[static_cast<std::size_t>(g)] = src.bids[static_cast<std::size_t>(g)];
  dst.versions[static_cast<std::size_t>(g)] = src.versions[static_cast<std::size_t>(g)];
}

bool outbids(const TaskTable& table, int other, int self) {
  const double a = table.bids[static_cast<std::size_t>(other)];
  const double b = table.bids[static_cast<std::size_t>(self)];
  return a > b || (a == b && other < self);
}

}  // namespace

ConsensusOutcome consensus_step(int drone, const TaskTable& own, std::span<const TaskTable> received,
                                const ScoreVector& scores, double eps_tilde) {
  own.check(own.num_targets, own.num_drones);
  if (drone < 0 || drone >= own.num_drones) {
    throw ProtocolError("drone id " + std::to_string(drone) + " out of range");
  }
  for (const auto& table : received) table.check(own.num_targets, own.num_drones);

  ConsensusOutcome out{own, scores, false, std::nullopt};
  TaskTable& merged = out.table;

  for (int g = 0; g < merged.num_drones; ++g) {
    if (g == drone) continue;
    const TaskTable* newest = nullptr;
    for (const auto& table : received) {
      const auto v = table.versions[static_cast<std::size_t>(g)];
      if (v > merged.versions[static_cast<std::size_t>(g)] &&
          (newest == nullptr || v > newest->versions[static_cast<std::size_t>(g)])) {
        newest = &table;
      }
    }
    if (newest != nullptr) {
      copy_column(merged, *newest, g);
    } else {
      // Equal versions: entry-wise max keeps the merge monotone.
      for (const auto& table : received) {
        if (table.versions[static_cast<std::size_t>(g)] != merged.versions[static_cast<std::size_t>(g)]) {
          continue;
        }
        for (int j = 0; j < merged.num_targets; ++j) {
          if (table.claim(j, g)) merged.set_claim(j, g, true);
        }
      }
    }
  }

  const std::optional<int> current = merged.claimed_target(drone);
  if (!current || merged.claim_count(*current) <= 2) {
    merged.stalled = 0;
    return out;
  }
  ++merged.stalled;  // undone below on release
  if (scores.size() <= 1) return out;
  const int jstar = *current;

  int stronger = 0;
  for (int g = 0; g < merged.num_drones; ++g) {
    if (g != drone && merged.claim(jstar, g) && outbids(merged, g, drone)) ++stronger;
  }
  if (stronger < std::max(0, 2 - own.stalled)) return out;

  std::optional<int> h;
  int h_count = std::numeric_limits<int>::max();
  double h_score = -std::numeric_limits<double>::infinity();
  for (int j : scores.targets) {
    if (j == jstar) continue;
    const int count = merged.claim_count(j);
    if (count > 2) continue;
    const double c = scores.score(j);
    if (count < h_count || (count == h_count && c > h_score)) {
      h = j;
      h_count = count;
      h_score = c;
    }
  }
  if (!h) return out;

  merged.set_claim(jstar, drone, false);
  merged.stalled = 0;
  merged.bids[static_cast<std::size_t>(drone)] = 0.0;
  ++merged.versions[static_cast<std::size_t>(drone)];
  const double boost = eps_tilde * (scores.score(jstar) - scores.score(*h));
  double& extra = out.scores.extra(*h);
  extra = std::max(extra, boost);
  out.released = true;
  out.boosted_target = h;
  return out;
}

namespace {

std::vector<int> unassigned_targets(const std::vector<TaskTable>& tables, int num_targets) {
  std::vector<int> counts(static_cast<std::size_t>(num_targets), 0);
  for (const auto& table : tables) {
    if (auto j = table.claimed_target(table.owner)) ++counts[static_cast<std::size_t>(*j)];
  }
  std::vector<int> out;
  for (int j = 0; j < num_targets; ++j) {
    if (counts[static_cast<std::size_t>(j)] != 2) out.push_back(j);
  }
  return out;
}

std::string join(const std::vector<int>& ids) {
  std::string s;
  for (std::size_t k = 0; k < ids.size(); ++k) {
    if (k) s += ", ";
    s += std::to_string(ids[k]);
  }
  return s;
}

}  // namespace

AssignmentResult run_assignment(const AssignmentProblem& problem, const AssignmentConfig& cfg) {
  const int n = problem.num_drones;
  const int m = problem.num_targets;
  if (n != 2 * m) {
    throw ConfigError("assignment needs exactly two drones per target (N = 2M)");
  }
  if (problem.distances.size() != static_cast<std::size_t>(n) ||
      problem.neighbors.size() != static_cast<std::size_t>(n)) {
    throw ArgumentError("assignment problem dimensions do not match drone count");
  }
  if (!(std::isfinite(cfg.eps_tilde) && cfg.eps_tilde > 1.0)) {
    throw ConfigError("eps_tilde must exceed 1");
  }

  std::vector<ScoreVector> scores;
  std::vector<int> watchers(static_cast<std::size_t>(m), 0);
  for (int i = 0; i < n; ++i) {
    const auto& row = problem.distances[static_cast<std::size_t>(i)];
    if (row.size() != static_cast<std::size_t>(m)) {
      throw ArgumentError("distance row of drone " + std::to_string(i) + " has wrong length");
    }
    scores.push_back(make_scores(row));
    for (int j : scores.back().targets) ++watchers[static_cast<std::size_t>(j)];
  }
  std::vector<int> blind;
  for (int j = 0; j < m; ++j) {
    if (watchers[static_cast<std::size_t>(j)] < 2) blind.push_back(j);
  }
  if (!blind.empty()) {
    throw AssignmentError("targets visible to fewer than two drones: " + join(blind), blind);
  }

  std::vector<TaskTable> tables;
  for (int i = 0; i < n; ++i) tables.push_back(TaskTable::empty(i, m, n));

  AssignmentResult result;
  const int cap = cfg.max_rounds > 0 ? cfg.max_rounds : 10 * n;
  for (int round = 1; round <= cap; ++round) {
    for (int i = 0; i < n; ++i) {
      auto& table = tables[static_cast<std::size_t>(i)];
      if (table.column_sum(i) == 0) table = auction_step(i, table, scores[static_cast<std::size_t>(i)]);
    }

    const std::vector<TaskTable> snapshot = tables;
    bool any_release = false;
    for (int i = 0; i < n; ++i) {
      std::vector<TaskTable> inbox;
      for (int g : problem.neighbors[static_cast<std::size_t>(i)]) {
        if (g < 0 || g >= n || g == i) throw ArgumentError("invalid neighbour id");
        inbox.push_back(snapshot[static_cast<std::size_t>(g)]);
      }
      ConsensusOutcome outcome = consensus_step(i, snapshot[static_cast<std::size_t>(i)], inbox,
                                                scores[static_cast<std::size_t>(i)], cfg.eps_tilde);
      outcome.table.iteration = round;
      any_release = any_release || outcome.released;
      result.trace.push_back(AssignmentTraceRecord{round, i, outcome.table.claimed_target(i),
                                                   outcome.released, outcome.table.hash()});
      tables[static_cast<std::size_t>(i)] = std::move(outcome.table);
      scores[static_cast<std::size_t>(i)] = std::move(outcome.scores);
    }

    if (any_release || !unassigned_targets(tables, m).empty()) continue;

    // Every table must hold the settled claim matrix.
    TaskTable truth = TaskTable::empty(0, m, n);
    for (const auto& table : tables) {
      for (int j = 0; j < m; ++j) truth.set_claim(j, table.owner, table.claim(j, table.owner));
    }
    const bool agreed = std::all_of(tables.begin(), tables.end(),
                                    [&](const TaskTable& t) { return t.claims == truth.claims; });
    if (!agreed) continue;

    result.rounds = round;
    for (int j = 0; j < m; ++j) {
      std::vector<int> owners;
      for (int g = 0; g < n; ++g) {
        if (truth.claim(j, g)) owners.push_back(g);
      }
      result.pairs.push_back(AssignedPair{j, owners[0], owners[1]});
    }
    result.tables = std::move(tables);
    return result;
  }

  const auto missing = unassigned_targets(tables, m);
  throw AssignmentError("assignment did not settle within " + std::to_string(cap) +
                            " rounds; unassigned targets: " + join(missing),
                        missing);
}

}  // namespace encircle

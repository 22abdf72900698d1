#pragma once

#include <cstdint>
#include <optional>
#include <span>
#include <vector>

namespace encircle {

/// One drone's belief of which drone claims which target.
///
/// `claims` is the M x N binary matrix stored row-major (target-major). Each drone
/// column also carries the claimant's bid and a version counter that the owner bumps
/// whenever it changes its own claim, so releases propagate through the merge.
struct TaskTable {
  int owner = 0;
  int num_targets = 0;
  int num_drones = 0;
  std::vector<std::uint8_t> claims;
  std::vector<double> bids;
  std::vector<std::uint64_t> versions;
  int iteration = 0;
  /// Owner-local: consecutive rounds the owner held an over-subscribed claim without
  /// releasing it. Not shared by the merge.
  int stalled = 0;

  static TaskTable empty(int owner, int num_targets, int num_drones);

  bool claim(int target, int drone) const;
  void set_claim(int target, int drone, bool value);
  int claim_count(int target) const;
  int column_sum(int drone) const;
  /// Lowest target claimed by `drone`, if any.
  std::optional<int> claimed_target(int drone) const;
  /// FNV-1a over the claim matrix.
  std::uint64_t hash() const;
  /// Throws ProtocolError when dimensions or entries are malformed.
  void check(int expected_targets, int expected_drones) const;
};

/// Rewards c_{i,j} = 1/d_{i,j} + c_{i,j,2} over the targets drone i can see.
struct ScoreVector {
  std::vector<int> targets;  ///< ascending target ids
  std::vector<double> distance_reward;
  std::vector<double> extra_reward;

  bool contains(int target) const;
  double score(int target) const;
  double& extra(int target);
  std::size_t size() const { return targets.size(); }
};

/// Minimum distance used in 1/d.
inline constexpr double kMinAuctionDistance = 1e-6;

/// Builds a score vector from per-target distances (nullopt marks an invisible target).
ScoreVector make_scores(std::span<const std::optional<double>> distances);

/// Auction: an unassigned drone claims argmax_j c_{i,j}, lowest index on ties.
/// No-op when the drone sees no targets. Throws ProtocolError if the drone already
/// holds a claim.
TaskTable auction_step(int drone, const TaskTable& table, const ScoreVector& scores);

struct ConsensusOutcome {
  TaskTable table;
  ScoreVector scores;
  bool released = false;
  std::optional<int> boosted_target;
};

/// Merge neighbour tables, then apply the release-and-boost rule.
///
/// Merge: for every other drone column, take the column from whichever table carries
/// the newest version of it (max on ties). The own column is never overwritten.
/// Release: with j* the drone's own current claim, release when the drone sees more
/// than one target, j* has more than two claimants, at least max(0, 2 - stalled) of
/// those claimants outbid this drone (ties go to the lower id), and some visible h has
/// at most two claimants. The stall counter lets stronger bidders give way when the
/// weaker ones have nowhere else to go. h is the candidate with the fewest claimants, then highest score, then
/// lowest id; its extra reward becomes max(old, eps_tilde * (c_{i,j*} - c_{i,h})).
ConsensusOutcome consensus_step(int drone, const TaskTable& own, std::span<const TaskTable> received,
                                const ScoreVector& scores, double eps_tilde);

struct AssignmentProblem {
  int num_targets = 0;
  int num_drones = 0;
  /// distances[drone][target]; nullopt when the target is outside the drone's range.
  std::vector<std::vector<std::optional<double>>> distances;
  /// neighbors[drone]: drones within communication range.
  std::vector<std::vector<int>> neighbors;
};

struct AssignmentConfig {
  double eps_tilde = 1.5;
  int max_rounds = 0;  ///< 0 selects 10 * N
};

struct AssignmentTraceRecord {
  int round = 0;
  int drone = 0;
  std::optional<int> claimed_target;
  bool released = false;
  std::uint64_t table_hash = 0;
};

/// Target with its two drones; `lead` is the lower id and takes the +P side.
struct AssignedPair {
  int target = 0;
  int lead = 0;
  int trail = 0;
};

struct AssignmentResult {
  std::vector<AssignedPair> pairs;  ///< ordered by target id
  int rounds = 0;
  std::vector<AssignmentTraceRecord> trace;
  std::vector<TaskTable> tables;
};

/// Synchronous auction + consensus rounds until every target has exactly two
/// claimants and all tables agree. Drones holding a claim skip the auction.
/// Throws AssignmentError (naming the unassigned targets) when a target is seen by
/// fewer than two drones or the round cap is hit.
AssignmentResult run_assignment(const AssignmentProblem& problem, const AssignmentConfig& cfg);

}  // namespace encircle

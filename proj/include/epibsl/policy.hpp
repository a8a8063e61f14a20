#pragma once

#include <array>
#include <cstdint>
#include <initializer_list>
#include <string>
#include <string_view>
#include <vector>

#include "epibsl/model.hpp"

namespace epibsl {

/// Subset of {Arm1, Arm2, Skip}.
class ActionSet {
public:
    constexpr ActionSet() = default;
    constexpr ActionSet(std::initializer_list<Action> actions) {
        for (Action a : actions) mask_ |= bit(a);
    }
    static constexpr ActionSet all() { return {Action::Skip, Action::Arm1, Action::Arm2}; }

    constexpr bool contains(Action a) const { return (mask_ & bit(a)) != 0; }

private:
    static constexpr std::uint8_t bit(Action a) { return std::uint8_t(1u << static_cast<int>(a)); }
    std::uint8_t mask_ = 0;
};

/// Deterministic per-episode policy.
///
/// Every root-to-leaf path holds exactly `depth()` decisions. An arm node has children
/// indexed by the observed reward (0, 1); a Skip node is continued by child 0 and may
/// carry an unreachable child 1. Nodes at the last round have no children.
class PolicyTree {
public:
    static constexpr std::int32_t kNone = -1;

    struct Node {
        Action action = Action::Skip;
        std::array<std::int32_t, 2> child{kNone, kNone};
        friend bool operator==(const Node&, const Node&) = default;
    };

    /// Single-decision tree.
    static PolicyTree leaf(Action a);
    static PolicyTree skip_then(const PolicyTree& next);
    /// Skip node that also stores a reward-1 branch; it is never reached.
    static PolicyTree skip_then(const PolicyTree& next, const PolicyTree& unreachable);
    static PolicyTree arm_then(Action arm, const PolicyTree& on0, const PolicyTree& on1);

    /// Plays `a` at every node for `depth` rounds.
    static PolicyTree constant(Action a, int depth);

    /// Checks that node 0 is the root and every path has exactly `depth` nodes.
    static PolicyTree from_nodes(int depth, std::vector<Node> nodes);

    /// Compact notation: `1`, `2`, `S` for actions; an arm is followed by `(on0,on1)` and a
    /// Skip by `(next)` or `(next,unreachable)` unless it is in the last round.
    /// Example: "2(1,S)".
    static PolicyTree parse(std::string_view text);

    int depth() const { return depth_; }
    std::size_t size() const { return nodes_.size(); }
    const Node& node(std::int32_t i) const { return nodes_[static_cast<std::size_t>(i)]; }
    const Node& root() const { return nodes_.front(); }
    const std::vector<Node>& nodes() const { return nodes_; }

    std::string to_string() const;

    /// Indented multi-line dump with branch labels.
    std::string pretty() const;

    friend bool operator==(const PolicyTree&, const PolicyTree&) = default;

private:
    PolicyTree(int depth, std::vector<Node> nodes) : depth_(depth), nodes_(std::move(nodes)) {}
    static std::int32_t graft(std::vector<Node>& out, const PolicyTree& sub);

    int depth_ = 0;
    std::vector<Node> nodes_;
};

}  // namespace epibsl

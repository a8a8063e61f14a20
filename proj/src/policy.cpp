#include "epibsl/policy.hpp"

#include <functional>
#include <sstream>
#include <stdexcept>

namespace epibsl {

namespace {

char action_char(Action a) {
    switch (a) {
        case Action::Arm1: return '1';
        case Action::Arm2: return '2';
        case Action::Skip: return 'S';
    }
    return '?';
}

}  // namespace

std::int32_t PolicyTree::graft(std::vector<Node>& out, const PolicyTree& sub) {
    const auto offset = static_cast<std::int32_t>(out.size());
    for (Node n : sub.nodes_) {
        for (auto& c : n.child) {
            if (c != kNone) c += offset;
        }
        out.push_back(n);
    }
    return offset;
}

PolicyTree PolicyTree::leaf(Action a) { return PolicyTree(1, {Node{a, {kNone, kNone}}}); }

PolicyTree PolicyTree::skip_then(const PolicyTree& next) {
    std::vector<Node> nodes{Node{Action::Skip, {kNone, kNone}}};
    nodes.reserve(next.size() + 1);
    nodes[0].child[0] = graft(nodes, next);
    return PolicyTree(next.depth_ + 1, std::move(nodes));
}

PolicyTree PolicyTree::skip_then(const PolicyTree& next, const PolicyTree& unreachable) {
    if (next.depth_ != unreachable.depth_) throw std::invalid_argument("skip_then: subtree depths differ");
    std::vector<Node> nodes{Node{Action::Skip, {kNone, kNone}}};
    const auto c0 = graft(nodes, next);
    const auto c1 = graft(nodes, unreachable);
    nodes[0].child = {c0, c1};
    return PolicyTree(next.depth_ + 1, std::move(nodes));
}

PolicyTree PolicyTree::arm_then(Action arm, const PolicyTree& on0, const PolicyTree& on1) {
    if (arm == Action::Skip) throw std::invalid_argument("arm_then needs Arm1 or Arm2");
    if (on0.depth_ != on1.depth_) throw std::invalid_argument("arm_then: subtree depths differ");
    std::vector<Node> nodes{Node{arm, {kNone, kNone}}};
    nodes.reserve(on0.size() + on1.size() + 1);
    const auto c0 = graft(nodes, on0);
    const auto c1 = graft(nodes, on1);
    nodes[0].child = {c0, c1};
    return PolicyTree(on0.depth_ + 1, std::move(nodes));
}

PolicyTree PolicyTree::constant(Action a, int depth) {
    if (depth < 1) throw std::invalid_argument("policy depth must be >= 1");
    PolicyTree t = leaf(a);
    for (int d = 1; d < depth; ++d) t = a == Action::Skip ? skip_then(t) : arm_then(a, t, t);
    return t;
}

PolicyTree PolicyTree::from_nodes(int depth, std::vector<Node> nodes) {
    if (depth < 1 || nodes.empty()) throw std::invalid_argument("empty policy tree");
    std::vector<int> seen(nodes.size(), 0);
    std::function<void(std::int32_t, int)> check = [&](std::int32_t i, int d) {
        if (i < 0 || static_cast<std::size_t>(i) >= nodes.size()) {
            throw std::invalid_argument("policy tree: child index out of range");
        }
        if (seen[static_cast<std::size_t>(i)]++) {
            throw std::invalid_argument("policy tree: node shared or cyclic");
        }
        const Node& n = nodes[static_cast<std::size_t>(i)];
        const bool last = d == depth;
        for (int r = 0; r < 2; ++r) {
            // A Skip node may carry an unreachable reward-1 branch.
            const bool optional = n.action == Action::Skip && r == 1 && !last;
            const bool want = optional ? n.child[r] != kNone : !last;
            if ((n.child[r] != kNone) != want) {
                throw std::invalid_argument("policy tree: leaf depth differs from " +
                                            std::to_string(depth));
            }
            if (want) check(n.child[r], d + 1);
        }
    };
    check(0, 1);
    for (int s : seen) {
        if (s == 0) throw std::invalid_argument("policy tree: unreachable node");
    }
    return PolicyTree(depth, std::move(nodes));
}

PolicyTree PolicyTree::parse(std::string_view text) {
    std::string s;
    for (char c : text) {
        if (c != ' ' && c != '\t' && c != '\n') s += c;
    }
    std::size_t pos = 0;
    auto fail = [&](const std::string& what) -> PolicyTree {
        throw std::invalid_argument("policy parse error at offset " + std::to_string(pos) + ": " +
                                    what);
    };
    std::function<PolicyTree()> node = [&]() -> PolicyTree {
        if (pos >= s.size()) return fail("unexpected end");
        Action a;
        switch (s[pos]) {
            case '1': a = Action::Arm1; break;
            case '2': a = Action::Arm2; break;
            case 'S': case 's': a = Action::Skip; break;
            default: return fail(std::string("unknown action '") + s[pos] + "'");
        }
        ++pos;
        if (pos >= s.size() || s[pos] != '(') return leaf(a);
        ++pos;
        PolicyTree first = node();
        if (a == Action::Skip && pos < s.size() && s[pos] == ')') {
            ++pos;
            return skip_then(first);
        }
        if (pos >= s.size() || s[pos] != ',') return fail("expected ','");
        ++pos;
        PolicyTree second = node();
        if (pos >= s.size() || s[pos] != ')') return fail("expected ')'");
        ++pos;
        if (first.depth() != second.depth()) return fail("branches have different depths");
        if (a == Action::Skip) return skip_then(first, second);
        return arm_then(a, first, second);
    };
    PolicyTree t = node();
    if (pos != s.size()) return fail("trailing characters");
    return t;
}

std::string PolicyTree::to_string() const {
    std::string out;
    std::function<void(std::int32_t)> rec = [&](std::int32_t i) {
        const Node& n = node(i);
        out += action_char(n.action);
        if (n.child[0] == kNone) return;
        out += '(';
        rec(n.child[0]);
        if (n.child[1] != kNone) {
            out += ',';
            rec(n.child[1]);
        }
        out += ')';
    };
    rec(0);
    return out;
}

std::string PolicyTree::pretty() const {
    std::ostringstream os;
    std::function<void(std::int32_t, int, const char*)> rec = [&](std::int32_t i, int indent,
                                                                  const char* label) {
        const Node& n = node(i);
        os << std::string(static_cast<std::size_t>(indent) * 2, ' ') << label
           << epibsl::to_string(n.action) << '\n';
        if (n.action == Action::Skip) {
            if (n.child[0] != kNone) rec(n.child[0], indent + 1, "then: ");
            if (n.child[1] != kNone) rec(n.child[1], indent + 1, "(unreachable r=1): ");
        } else {
            if (n.child[0] != kNone) rec(n.child[0], indent + 1, "r=0: ");
            if (n.child[1] != kNone) rec(n.child[1], indent + 1, "r=1: ");
        }
    };
    rec(0, 0, "");
    return os.str();
}

}  // namespace epibsl

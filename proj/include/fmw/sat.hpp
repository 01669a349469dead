#pragma once

#include <algorithm>
#include <cstdint>
#include <cstdlib>
#include <queue>
#include <vector>

namespace fmw {

// Compact CDCL solver: two watched literals, first-UIP clause learning with
// backjumping, activity-driven branching with deterministic tie-breaks.
// Variables are 1-based; literals are +v / -v. Clauses are added before
// solve(); runs are fully deterministic.
class SatSolver {
public:
    int new_var() {
        ++nvars_;
        assigns_.push_back(0);
        level_.push_back(0);
        reason_.push_back(-1);
        activity_.push_back(0.0);
        phase_.push_back(1); // branch true first
        watches_.resize(2 * static_cast<size_t>(nvars_) + 2);
        order_.push({0.0, nvars_});
        return nvars_;
    }

    // Clauses may be added between solve calls; literals already false at
    // level 0 are stripped on entry.
    void add_clause(std::vector<int> lits) {
        backjump(0);
        std::sort(lits.begin(), lits.end(), [](int a, int b) {
            return std::abs(a) != std::abs(b) ? std::abs(a) < std::abs(b) : a < b;
        });
        std::vector<int> out;
        for (size_t i = 0; i < lits.size(); ++i) {
            if (i + 1 < lits.size() && lits[i] == -lits[i + 1]) return; // tautology
            int v = lit_value(lits[i]);
            if (v == 1) return;  // already satisfied at level 0
            if (v == -1) continue;
            if (out.empty() || out.back() != lits[i]) out.push_back(lits[i]);
        }
        if (out.empty()) {
            unsat_root_ = true;
            return;
        }
        if (out.size() == 1) {
            if (!enqueue(out[0], -1)) unsat_root_ = true;
            if (propagate() >= 0) unsat_root_ = true;
            return;
        }
        attach(std::move(out));
    }

    // Incremental solve under assumptions. Learned clauses persist across
    // calls; the run is deterministic for a fixed call sequence.
    bool solve(const std::vector<int>& assumptions = {}) {
        if (unsat_root_) return false;
        backjump(0);
        if (propagate() >= 0) {
            unsat_root_ = true;
            return false;
        }
        size_t placed = 0;
        while (true) {
            int confl = propagate();
            if (confl >= 0) {
                if (decision_level() == 0) {
                    unsat_root_ = true;
                    return false;
                }
                if (decision_level() <= static_cast<int>(placed)) {
                    // conflict forced by the assumptions alone
                    backjump(0);
                    return false;
                }
                std::vector<int> learned;
                int back_level = 0;
                analyze(confl, learned, back_level);
                if (learned.size() == 1) {
                    // level-0 fact; re-place assumptions afterwards
                    backjump(0);
                    placed = 0;
                    if (!enqueue(learned[0], -1)) {
                        unsat_root_ = true;
                        return false;
                    }
                } else {
                    if (back_level < static_cast<int>(placed)) back_level = static_cast<int>(placed);
                    backjump(back_level);
                    int ci = attach(std::move(learned));
                    enqueue(clauses_[static_cast<size_t>(ci)][0], ci);
                }
                decay_activities();
            } else if (placed < assumptions.size()) {
                int a = assumptions[placed];
                int v = lit_value(a);
                if (v == -1) {
                    backjump(0);
                    return false;
                }
                trail_lim_.push_back(trail_.size());
                ++placed;
                if (v == 0) enqueue(a, -1);
            } else {
                int v = pick_branch();
                if (v == 0) return true;
                trail_lim_.push_back(trail_.size());
                enqueue(phase_[static_cast<size_t>(v)] ? v : -v, -1);
            }
        }
    }

    bool value(int var) const { return assigns_[static_cast<size_t>(var)] > 0; }

private:
    int attach(std::vector<int> lits) {
        clauses_.push_back(std::move(lits));
        int ci = static_cast<int>(clauses_.size()) - 1;
        const std::vector<int>& cl = clauses_.back();
        watches_[widx(cl[0])].push_back(ci);
        watches_[widx(cl[1])].push_back(ci);
        return ci;
    }

    static size_t widx(int lit) {
        return 2 * static_cast<size_t>(std::abs(lit)) + (lit > 0 ? 0 : 1);
    }

    int lit_value(int lit) const {
        int8_t a = assigns_[static_cast<size_t>(std::abs(lit))];
        if (a == 0) return 0;
        return (a > 0) == (lit > 0) ? 1 : -1;
    }

    int decision_level() const { return static_cast<int>(trail_lim_.size()); }

    bool enqueue(int lit, int reason) {
        int v = lit_value(lit);
        if (v == 1) return true;
        if (v == -1) return false;
        size_t var = static_cast<size_t>(std::abs(lit));
        assigns_[var] = lit > 0 ? 1 : -1;
        phase_[var] = lit > 0;
        level_[var] = decision_level();
        reason_[var] = reason;
        trail_.push_back(lit);
        return true;
    }

    // returns index of a conflicting clause, or -1
    int propagate() {
        while (qhead_ < trail_.size()) {
            int lit = trail_[qhead_++];
            std::vector<int>& ws = watches_[widx(-lit)];
            size_t keep = 0;
            for (size_t wi = 0; wi < ws.size(); ++wi) {
                int ci = ws[wi];
                std::vector<int>& cl = clauses_[static_cast<size_t>(ci)];
                if (cl[0] == -lit) std::swap(cl[0], cl[1]);
                if (lit_value(cl[0]) == 1) {
                    ws[keep++] = ci;
                    continue;
                }
                bool moved = false;
                for (size_t k = 2; k < cl.size(); ++k) {
                    if (lit_value(cl[k]) != -1) {
                        std::swap(cl[1], cl[k]);
                        watches_[widx(cl[1])].push_back(ci);
                        moved = true;
                        break;
                    }
                }
                if (moved) continue;
                ws[keep++] = ci;
                if (!enqueue(cl[0], ci)) {
                    for (size_t rest = wi + 1; rest < ws.size(); ++rest) ws[keep++] = ws[rest];
                    ws.resize(keep);
                    return ci;
                }
            }
            ws.resize(keep);
        }
        return -1;
    }

    void bump(int var) {
        activity_[static_cast<size_t>(var)] += activity_inc_;
        if (activity_[static_cast<size_t>(var)] > 1e100) {
            for (double& a : activity_) a *= 1e-100;
            activity_inc_ *= 1e-100;
        }
        order_.push({activity_[static_cast<size_t>(var)], var});
    }

    void decay_activities() { activity_inc_ *= 1.0 / 0.95; }

    // first-UIP learning; learned[0] is the asserting literal
    void analyze(int confl, std::vector<int>& learned, int& back_level) {
        std::vector<uint8_t> seen(static_cast<size_t>(nvars_) + 1, 0);
        int counter = 0;
        int p = 0; // trail literal being resolved on; 0 on the conflict clause
        size_t idx = trail_.size();
        learned.push_back(0); // placeholder for the asserting literal
        int ci = confl;
        do {
            const std::vector<int>& cl = clauses_[static_cast<size_t>(ci)];
            for (int q : cl) {
                if (p != 0 && q == p) continue; // the implied literal itself
                size_t var = static_cast<size_t>(std::abs(q));
                if (seen[var] || level_[var] == 0) continue;
                seen[var] = 1;
                bump(std::abs(q));
                if (level_[var] == decision_level())
                    ++counter;
                else
                    learned.push_back(q);
            }
            // pick next literal on the current level from the trail
            while (!seen[static_cast<size_t>(std::abs(trail_[idx - 1]))]) --idx;
            p = trail_[idx - 1];
            --idx;
            seen[static_cast<size_t>(std::abs(p))] = 0;
            ci = reason_[static_cast<size_t>(std::abs(p))];
            --counter;
        } while (counter > 0);
        learned[0] = -p;

        back_level = 0;
        if (learned.size() > 1) {
            size_t max_i = 1;
            for (size_t i = 2; i < learned.size(); ++i)
                if (level_[static_cast<size_t>(std::abs(learned[i]))] >
                    level_[static_cast<size_t>(std::abs(learned[max_i]))])
                    max_i = i;
            std::swap(learned[1], learned[max_i]);
            back_level = level_[static_cast<size_t>(std::abs(learned[1]))];
        }
    }

    void backjump(int level) {
        while (decision_level() > level) {
            size_t start = trail_lim_.back();
            while (trail_.size() > start) {
                size_t var = static_cast<size_t>(std::abs(trail_.back()));
                assigns_[var] = 0;
                reason_[var] = -1;
                order_.push({activity_[var], static_cast<int>(var)});
                trail_.pop_back();
            }
            trail_lim_.pop_back();
        }
        qhead_ = trail_.size();
    }

    // lazy heap with stale-entry deletion; falls back to a scan when drained
    int pick_branch() {
        while (!order_.empty()) {
            auto [act, var] = order_.top();
            if (assigns_[static_cast<size_t>(var)] != 0 ||
                act != activity_[static_cast<size_t>(var)]) {
                order_.pop();
                continue;
            }
            return var;
        }
        for (int v = 1; v <= nvars_; ++v)
            if (assigns_[static_cast<size_t>(v)] == 0) return v;
        return 0;
    }

    struct OrderCmp {
        bool operator()(const std::pair<double, int>& x, const std::pair<double, int>& y) const {
            if (x.first != y.first) return x.first < y.first;
            return x.second > y.second; // top = highest activity, lowest var
        }
    };

    int nvars_ = 0;
    bool unsat_root_ = false;
    std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>, OrderCmp>
        order_;
    std::vector<int8_t> assigns_ = {0};
    std::vector<int> level_ = {0};
    std::vector<int> reason_ = {-1};
    std::vector<double> activity_ = {0.0};
    std::vector<uint8_t> phase_ = {1};
    double activity_inc_ = 1.0;
    std::vector<std::vector<int>> clauses_;
    std::vector<std::vector<int>> watches_ = {{}, {}};
    std::vector<int> trail_;
    size_t qhead_ = 0;
    std::vector<size_t> trail_lim_;
};

} // namespace fmw

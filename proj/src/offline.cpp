#include "espkit/offline.hpp"

#include <algorithm>
#include <cmath>
#include <queue>
#include <utility>

namespace espkit {

namespace {

constexpr double kInfCap = 1e30;

// Min-cost flow with real-valued capacities: successive shortest augmenting
// paths under node potentials (Dijkstra).  Costs are non-negative, so the
// initial zero potential is valid.
class FlowNetwork {
public:
    explicit FlowNetwork(int nodes) : head_(nodes, -1), excess_(nodes, 0.0) {}

    int add_arc(int from, int to, double cap, double cost) {
        const int id = static_cast<int>(arcs_.size());
        arcs_.push_back({to, next_of(from), cap, cost});
        head_[from] = id;
        arcs_.push_back({from, next_of(to), 0.0, -cost});
        head_[to] = id + 1;
        return id;
    }

    void add_excess(int node, double amount) { excess_[node] += amount; }

    double flow_on(int arc_id) const { return arcs_[static_cast<std::size_t>(arc_id) ^ 1].cap; }

    // Routes all excess to deficits.  Returns false when some deficit is
    // unreachable; `blocked` then holds one unsatisfied node.
    bool run(double eps, int* blocked) {
        const int n = static_cast<int>(head_.size());
        std::vector<double> potential(n, 0.0), dist(n);
        std::vector<int> parent_arc(n);
        std::vector<char> settled(n);

        for (;;) {
            int source_count = 0;
            for (int v = 0; v < n; ++v)
                if (excess_[v] > eps) ++source_count;
            if (source_count == 0) break;

            // Multi-source Dijkstra on reduced costs.
            std::priority_queue<std::pair<double, int>, std::vector<std::pair<double, int>>,
                                std::greater<>> heap;
            std::fill(dist.begin(), dist.end(), kInfCap);
            std::fill(parent_arc.begin(), parent_arc.end(), -1);
            std::fill(settled.begin(), settled.end(), 0);
            for (int v = 0; v < n; ++v)
                if (excess_[v] > eps) {
                    dist[v] = 0.0;
                    heap.emplace(0.0, v);
                }

            int sink = -1;
            while (!heap.empty()) {
                auto [d, u] = heap.top();
                heap.pop();
                if (settled[u]) continue;
                settled[u] = 1;
                if (excess_[u] < -eps) {
                    sink = u;
                    break;
                }
                for (int id = head_[u]; id != -1; id = arcs_[id].next) {
                    const Arc& a = arcs_[id];
                    if (a.cap <= eps_residual_) continue;
                    const double rc = std::max(0.0, a.cost + potential[u] - potential[a.to]);
                    const double nd = d + rc;
                    if (nd < dist[a.to] && !settled[a.to]) {
                        dist[a.to] = nd;
                        parent_arc[a.to] = id;
                        heap.emplace(nd, a.to);
                    }
                }
            }

            if (sink == -1) {
                if (blocked) {
                    *blocked = -1;
                    for (int v = 0; v < n; ++v)
                        if (excess_[v] < -eps) {
                            *blocked = v;
                            break;
                        }
                }
                return false;
            }

            for (int v = 0; v < n; ++v)
                potential[v] += std::min(dist[v], dist[sink]);

            // Bottleneck along the path, then push.
            double push = -excess_[sink];
            int v = sink;
            while (parent_arc[v] != -1) {
                const int id = parent_arc[v];
                push = std::min(push, arcs_[id].cap);
                v = arcs_[id ^ 1].to;
            }
            push = std::min(push, excess_[v]);

            excess_[v] -= push;
            excess_[sink] += push;
            v = sink;
            while (parent_arc[v] != -1) {
                const int id = parent_arc[v];
                arcs_[id].cap -= push;
                arcs_[id ^ 1].cap += push;
                v = arcs_[id ^ 1].to;
            }
        }
        return true;
    }

    void set_residual_eps(double eps) { eps_residual_ = eps; }

private:
    struct Arc {
        int to;
        int next;
        double cap;   // residual capacity
        double cost;
    };

    int next_of(int node) const { return head_[node]; }

    std::vector<int> head_;
    std::vector<double> excess_;
    std::vector<Arc> arcs_;
    double eps_residual_ = 0.0;
};

struct SlotArcs {
    int grid_serve = -1;
    int grid_charge = -1;
    int renew_charge = -1;
    int discharge = -1;
    int carry = -1;  // N_t -> N_{t+1}, or terminal disposal for the last slot
};

}  // namespace

Schedule solve_window(const WindowProblem& prob, const StorageSpec& spec) {
    spec.validate();
    const int len = static_cast<int>(prob.slots.size());
    if (len < 1) throw std::invalid_argument("solve_window: window must have at least 1 slot");
    if (!prob.injected_level.empty() &&
        static_cast<int>(prob.injected_level.size()) != len)
        throw std::invalid_argument("solve_window: injected_level length mismatch");
    if (!prob.charge_cap_override.empty() &&
        static_cast<int>(prob.charge_cap_override.size()) != len)
        throw std::invalid_argument("solve_window: charge cap override length mismatch");
    if (!prob.discharge_cap_override.empty() &&
        static_cast<int>(prob.discharge_cap_override.size()) != len)
        throw std::invalid_argument("solve_window: discharge cap override length mismatch");

    const double eta_c = spec.charge_eff;
    const double eta_d = spec.discharge_eff;
    const double unit_cap = spec.capacity / eta_d;  // level bound in flow units

    // Flow units are discharge-equivalents (level / eta_d); with that change
    // of measure the charging/discharging gains disappear and the LP becomes
    // a pure min-cost flow on the time-expanded chain.
    const int grid = 0;
    auto trans_node = [](int t) { return t; };            // 1..len
    auto demand_node = [len](int t) { return len + t; };  // len+1..2len
    auto charge_node = [len](int t) { return 2 * len + t; };

    FlowNetwork net(3 * len + 1);
    std::vector<SlotArcs> arcs(static_cast<std::size_t>(len) + 1);

    double demand_total = 0.0;
    for (int t = 1; t <= len; ++t) {
        const SlotInput& in = prob.slots[static_cast<std::size_t>(t - 1)];
        SlotArcs& sa = arcs[static_cast<std::size_t>(t)];

        if (in.demand > 0.0) {
            sa.grid_serve = net.add_arc(grid, demand_node(t), kInfCap, in.price);
            net.add_excess(demand_node(t), -in.demand);
            demand_total += in.demand;
        }

        const double mu_c = prob.charge_cap_override.empty()
                                ? spec.charge_rate
                                : prob.charge_cap_override[static_cast<std::size_t>(t - 1)];
        const double mu_d = prob.discharge_cap_override.empty()
                                ? spec.discharge_rate
                                : prob.discharge_cap_override[static_cast<std::size_t>(t - 1)];

        const double port_cap = std::min(kInfCap, std::max(0.0, mu_c) * eta_c / eta_d);
        if (port_cap > 0.0 && unit_cap > 0.0) {
            net.add_arc(charge_node(t), trans_node(t), port_cap, 0.0);
            sa.grid_charge = net.add_arc(grid, charge_node(t), kInfCap, in.price * eta_d / eta_c);
            if (in.renewable > 0.0)
                sa.renew_charge =
                    net.add_arc(grid, charge_node(t), in.renewable * eta_c / eta_d, 0.0);
        }

        if (in.demand > 0.0 && mu_d > 0.0)
            sa.discharge = net.add_arc(trans_node(t), demand_node(t),
                                       std::min(kInfCap, mu_d), 0.0);

        if (t < len)
            sa.carry = net.add_arc(trans_node(t), trans_node(t + 1), unit_cap, 0.0);

        if (!prob.injected_level.empty())
            net.add_excess(trans_node(t),
                           prob.injected_level[static_cast<std::size_t>(t - 1)] / eta_d);
    }

    net.add_excess(trans_node(1), prob.level_init / eta_d);

    double exogenous = prob.level_init / eta_d - demand_total;
    for (double inj : prob.injected_level) exogenous += inj / eta_d;
    if (prob.level_final) {
        net.add_excess(trans_node(len), -*prob.level_final / eta_d);
        exogenous -= *prob.level_final / eta_d;
    } else {
        // Free terminal: leftover stock may sit at any level in [0, B].
        arcs[static_cast<std::size_t>(len)].carry =
            net.add_arc(trans_node(len), grid, unit_cap, 0.0);
    }
    net.add_excess(grid, -exogenous);

    const double scale = std::max(1.0, demand_total + prob.level_init / eta_d +
                                           (prob.level_final ? *prob.level_final / eta_d : 0.0));
    const double eps = 1e-12 * scale;
    net.set_residual_eps(eps * 1e-3);

    int blocked = -1;
    if (!net.run(eps, &blocked)) {
        int slot = len;
        if (blocked > len && blocked <= 2 * len) slot = blocked - len;
        else if (blocked >= 1 && blocked <= len) slot = blocked;
        throw InfeasibleError(slot, "window problem infeasible: terminal level unreachable "
                                    "or stranded stock cannot be drained");
    }

    Schedule out;
    out.decisions.resize(static_cast<std::size_t>(len));
    out.level.resize(static_cast<std::size_t>(len) + 1);
    out.level[0] = prob.level_init;
    for (int t = 1; t <= len; ++t) {
        const SlotArcs& sa = arcs[static_cast<std::size_t>(t)];
        Decision& dec = out.decisions[static_cast<std::size_t>(t - 1)];
        auto flow = [&net](int id) { return id < 0 ? 0.0 : net.flow_on(id); };
        dec.grid_serve = flow(sa.grid_serve);
        dec.grid_charge = flow(sa.grid_charge) * eta_d / eta_c;
        dec.renew_charge = flow(sa.renew_charge) * eta_d / eta_c;
        dec.discharge = flow(sa.discharge);
        if (t < len)
            out.level[static_cast<std::size_t>(t)] = flow(sa.carry) * eta_d;
    }
    out.level[static_cast<std::size_t>(len)] =
        prob.level_final ? *prob.level_final
                         : net.flow_on(arcs[static_cast<std::size_t>(len)].carry) * eta_d;

    double cost = 0.0;
    for (int t = 1; t <= len; ++t) {
        const Decision& dec = out.decisions[static_cast<std::size_t>(t - 1)];
        cost += prob.slots[static_cast<std::size_t>(t - 1)].price *
                (dec.grid_serve + dec.grid_charge);
    }
    out.cost = cost;
    return out;
}

Schedule solve_offline(const Trace& trace, const StorageSpec& spec) {
    trace.validate();
    spec.validate();

    // Reachability pre-check: charging at full rate from the start must be
    // able to lift the level to B_e.
    if (std::isfinite(spec.charge_rate)) {
        const double gain = spec.charge_eff * spec.charge_rate;
        double best = spec.level_start + gain * trace.horizon();
        if (best < spec.level_end - 1e-9 * std::max(1.0, spec.capacity)) {
            int slot = 1;
            // Earliest slot from which even full-rate charging cannot close the gap.
            for (int t = 1; t <= trace.horizon(); ++t) {
                const double reach_before =
                    std::min(spec.capacity, spec.level_start + gain * (t - 1));
                if (reach_before + gain * (trace.horizon() - t + 1) <
                    spec.level_end - 1e-9 * std::max(1.0, spec.capacity)) {
                    slot = t;
                    break;
                }
            }
            throw InfeasibleError(slot, "terminal level unreachable under charge rate cap");
        }
    }

    WindowProblem prob;
    prob.level_init = spec.level_start;
    prob.level_final = spec.level_end;
    prob.slots = trace.slots;
    return solve_window(prob, spec);
}

Schedule brute_force_offline(const Trace& trace, const StorageSpec& spec, int grid_steps) {
    trace.validate();
    spec.validate();
    const int horizon = trace.horizon();
    if (horizon > 12)
        throw std::invalid_argument("brute_force_offline: refusing horizon > 12");
    if (grid_steps < 1 || grid_steps > 64)
        throw std::invalid_argument("brute_force_offline: refusing grid_steps outside [1, 64]");

    const int levels = grid_steps + 1;
    const double step = spec.capacity > 0.0 ? spec.capacity / grid_steps : 0.0;
    auto level_of = [&](int idx) { return step * idx; };
    auto grid_index = [&](double level, const char* what) {
        const int idx = step > 0.0 ? static_cast<int>(std::lround(level / step)) : 0;
        if (idx < 0 || idx >= levels ||
            std::abs(level_of(idx) - level) > 1e-9 * std::max(1.0, spec.capacity))
            throw std::invalid_argument(std::string("brute_force_offline: ") + what +
                                        " not on the level grid");
        return idx;
    };

    const int start = grid_index(spec.level_start, "start level");
    const int goal = grid_index(spec.level_end, "end level");

    const double inf = std::numeric_limits<double>::infinity();
    std::vector<std::vector<double>> best(static_cast<std::size_t>(horizon) + 1,
                                          std::vector<double>(levels, inf));
    std::vector<std::vector<int>> from(static_cast<std::size_t>(horizon) + 1,
                                       std::vector<int>(levels, -1));
    std::vector<std::vector<Decision>> how(static_cast<std::size_t>(horizon) + 1,
                                           std::vector<Decision>(levels));
    best[0][start] = 0.0;

    const double eps = 1e-9;
    for (int t = 1; t <= horizon; ++t) {
        const SlotInput& in = trace.at(t);
        const double d_max = std::min(in.demand, spec.discharge_rate);

        // Candidate discharges: grid multiples plus the binding endpoint.
        std::vector<double> discharges;
        const double d_step = step > 0.0 ? step / spec.discharge_eff : 0.0;
        if (d_step > 0.0)
            for (double d = 0.0; d <= d_max + eps; d += d_step)
                discharges.push_back(std::min(d, d_max));
        discharges.push_back(0.0);
        discharges.push_back(d_max);

        for (int i = 0; i < levels; ++i) {
            if (best[t - 1][i] == inf) continue;
            for (int j = 0; j < levels; ++j) {
                const double delta = level_of(j) - level_of(i);
                double slot_best = inf;
                Decision slot_dec;
                for (double d : discharges) {
                    const double charge = (delta + spec.discharge_eff * d) / spec.charge_eff;
                    if (charge < -eps || charge > spec.charge_rate + eps) continue;
                    const double charge_clamped = std::max(0.0, charge);
                    const double renew = std::min(in.renewable, charge_clamped);
                    const double bought = charge_clamped - renew;
                    const double cost = in.price * ((in.demand - d) + bought);
                    if (cost < slot_best) {
                        slot_best = cost;
                        slot_dec = {d, renew, in.demand - d, bought};
                    }
                }
                if (slot_best == inf) continue;
                const double total = best[t - 1][i] + slot_best;
                if (total < best[t][j] - 1e-12) {
                    best[t][j] = total;
                    from[t][j] = i;
                    how[t][j] = slot_dec;
                }
            }
        }
    }

    if (best[horizon][goal] == inf)
        throw InfeasibleError(horizon, "no grid-restricted schedule reaches the end level");

    Schedule out;
    out.decisions.resize(static_cast<std::size_t>(horizon));
    out.level.resize(static_cast<std::size_t>(horizon) + 1);
    int idx = goal;
    for (int t = horizon; t >= 1; --t) {
        out.level[static_cast<std::size_t>(t)] = level_of(idx);
        out.decisions[static_cast<std::size_t>(t - 1)] = how[t][idx];
        idx = from[t][idx];
    }
    out.level[0] = level_of(idx);
    out.cost = best[horizon][goal];
    return out;
}

}  // namespace espkit

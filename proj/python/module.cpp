#include "hashgraph/attack.hpp"
#include "hashgraph/probability.hpp"
#include "hashgraph/simnet.hpp"

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

namespace py = pybind11;
using namespace hashgraph;

namespace {

py::list probe(std::uint32_t n_min, std::uint32_t n_max)
{
    if (n_min < 1 || n_min > n_max || n_max > attack::kMaxCoins)
        throw py::value_error("need 1 <= n_min <= n_max <= " + std::to_string(attack::kMaxCoins));
    py::list rows;
    for (std::uint32_t n = n_min; n <= n_max; ++n) {
        const auto exact = attack::exact_supermajority_prob(n);
        const auto tail = attack::one_sided_tail(n);
        const double bound = attack::hoeffding_bound(n);
        py::dict row;
        row["n"] = n;
        row["exact_prob"] = exact.str();
        row["exact_value"] = exact.value();
        row["expected_coin_rounds"] = attack::expected_coin_rounds(n);
        row["hoeffding_bound"] = bound;
        row["one_sided_tail"] = tail.value();
        row["tail_within_bound"] = tail.value() <= bound;
        rows.append(row);
    }
    return rows;
}

py::dict simulate(std::uint32_t n, std::uint32_t t, std::uint64_t seed, int coin_period, const std::string& scheduler,
                  std::uint64_t max_steps)
{
    sim::SimConfig cfg;
    cfg.n = n;
    cfg.seed = seed;
    cfg.coin_period = coin_period;
    cfg.max_steps = max_steps;
    if (t >= n) throw py::value_error("t must be below n");
    for (std::uint32_t i = 0; i < t; ++i) cfg.corrupted.push_back(n - t + i);
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw py::value_error(e.what());
    }
    cfg.tx_injection = sim::default_tx_schedule(cfg);
    sim::SimOptions opts;
    opts.record_trace = false;
    opts.scheduler_name = scheduler;
    std::unique_ptr<sim::Scheduler> sched;
    if (scheduler == "fair")
        sched = std::make_unique<sim::FairScheduler>(seed);
    else if (scheduler == "random")
        sched = std::make_unique<sim::RandomScheduler>(seed);
    else
        throw py::value_error("scheduler must be 'fair' or 'random'");

    sim::Simulation s(cfg, opts);
    bool stalled = false;
    {
        py::gil_scoped_release release;
        try {
            s.run_until_committed(*sched);
        } catch (const sim::Stalled&) {
            stalled = true;
            s.drain();
        }
    }
    const auto m = s.metrics();
    py::dict out;
    out["seed"] = m.seed;
    out["n"] = m.n;
    out["t"] = m.t;
    out["steps"] = m.steps;
    out["committed_tx"] = m.committed_tx;
    out["max_round"] = m.max_round;
    out["stalled"] = stalled;
    out["all_committed"] = s.all_injected_committed();
    out["violation"] = s.violation().has_value();
    return out;
}

py::dict run_attack(std::uint32_t n, std::uint64_t seed, int coin_period, int max_rounds)
{
    if (n < attack::kMinParties)
        throw py::value_error("the delay attack requires n >= " + std::to_string(attack::kMinParties));
    sim::SimConfig cfg;
    cfg.n = n;
    cfg.seed = seed;
    cfg.coin_period = coin_period;
    try {
        cfg.validate();
    } catch (const std::exception& e) {
        throw py::value_error(e.what());
    }
    sim::SimOptions opts;
    opts.record_trace = false;
    sim::Simulation s(cfg, opts);
    attack::DelayStats st;
    {
        py::gil_scoped_release release;
        st = attack::run_delay_attack(s, s.observer().id_at(s.observer().by_creator(0).front()), max_rounds);
    }
    py::dict out;
    out["target_round"] = st.target_round;
    out["rounds_elapsed"] = st.rounds_elapsed;
    out["coin_rounds_elapsed"] = st.coin_rounds_elapsed;
    out["decided_at"] = st.decided_at;
    out["supermajority_round"] = st.supermajority_round;
    out["overhead"] = st.overhead();
    out["fame"] = st.fame ? py::cast(std::string(to_string(*st.fame))) : py::none();
    out["coin_round_yes_counts"] = st.per_coin_round_yes_counts;
    out["control_lost_round"] = st.control_lost_round;
    out["failures"] = st.failures;
    return out;
}

}  // namespace

PYBIND11_MODULE(_hashgraph, m)
{
    m.doc() = "HashGraph simulation, delay attack and probability probe";
    m.def("probe", &probe, py::arg("n_min") = 7, py::arg("n_max") = 22,
          "Exact supermajority probability, expected coin rounds and tail bound per n.");
    m.def("simulate", &simulate, py::arg("n") = 4, py::arg("t") = 0, py::arg("seed") = 1, py::arg("coin_period") = 10,
          py::arg("scheduler") = "fair", py::arg("max_steps") = 100000,
          "Runs one seeded execution until every honest transaction is committed.");
    m.def("attack", &run_attack, py::arg("n") = 7, py::arg("seed") = 1, py::arg("coin_period") = 10,
          py::arg("max_rounds") = 200, "Runs the fame-delay attack against party 0's genesis witness.");
}

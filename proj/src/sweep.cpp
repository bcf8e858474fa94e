#include <atomic>
#include <cstdlib>
#include <exception>
#include <mutex>
#include <thread>

#include "nsadm/errors.hpp"
#include "nsadm/scenario_io.hpp"
#include "nsadm/sim.hpp"

namespace nsadm {

unsigned sweep_threads() {
  unsigned hw = std::max(1u, std::thread::hardware_concurrency());
  if (const char *env = std::getenv("NONSMOOTH_ADM_THREADS")) {
    char *end = nullptr;
    const long v = std::strtol(env, &end, 10);
    if (end != env && *end == '\0' && v >= 1)
      return static_cast<unsigned>(std::min<long>(v, 256));
  }
  return hw;
}

std::vector<SweepRow> sweep(const Scenario &base, const std::string &param_path,
                            const std::vector<double> &values,
                            unsigned max_threads) {
  const nlohmann::json doc = scenario_to_json(base);
  // Resolve all scenarios up front so configuration errors surface before
  // any simulation starts.
  std::vector<Scenario> jobs;
  jobs.reserve(values.size());
  for (double v : values) {
    nlohmann::json d = doc;
    apply_override(d, param_path, v);
    jobs.push_back(scenario_from_json(d));
  }

  std::vector<SweepRow> out(values.size());
  const unsigned nthreads = std::max(
      1u, std::min<unsigned>(max_threads ? max_threads : sweep_threads(),
                             static_cast<unsigned>(values.size())));
  std::atomic<std::size_t> next{0};
  std::exception_ptr failure;
  std::mutex failure_mutex;
  const auto worker = [&] {
    for (std::size_t i; (i = next++) < jobs.size();) {
      try {
        out[i] = {values[i], compute_metrics(run_scenario(jobs[i]), jobs[i])};
      } catch (...) {
        std::lock_guard<std::mutex> lock(failure_mutex);
        if (!failure)
          failure = std::current_exception();
      }
    }
  };
  std::vector<std::thread> pool;
  for (unsigned t = 1; t < nthreads; ++t)
    pool.emplace_back(worker);
  worker();
  for (auto &th : pool)
    th.join();
  if (failure)
    std::rethrow_exception(failure);
  return out;
}

} // namespace nsadm

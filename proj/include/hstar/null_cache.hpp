#pragma once

#include <cstdint>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>

#include "hstar/montecarlo.hpp"

namespace hstar {

// Where per-(prior, n) null laws come from. Implementations must be safe to
// query from several threads.
class null_source {
public:
    virtual ~null_source() = default;

    // Null for the standardized form of prior at sample size n.
    virtual std::shared_ptr<const null_distribution> get(const distribution_spec& prior, int n) = 0;

    virtual double p_value(const distribution_spec& prior, int n, double h_obs);
    virtual double critical_value(const distribution_spec& prior, int n, double alpha);
};

enum class missing_row_policy {
    // Simulate the missing n and cache it.
    simulate,
    // Linear in 1/nu between the nearest cached sizes on either side, falling
    // back to simulation when either side is absent.
    interpolate,
};

struct cache_options {
    std::uint64_t trials = 1'000'000;
    seed_t seed = 20240101;
    simulation_options sim{};
    // Empty: memory only. Otherwise null files live here.
    std::string directory;
    missing_row_policy policy = missing_row_policy::simulate;
};

// $HSTAR_CACHE_DIR, or empty.
std::string default_cache_directory();

class null_cache : public null_source {
public:
    explicit null_cache(cache_options opts = {});

    std::shared_ptr<const null_distribution> get(const distribution_spec& prior, int n) override;
    double p_value(const distribution_spec& prior, int n, double h_obs) override;

    // Cached without simulating: memory first, then the directory.
    std::shared_ptr<const null_distribution> find(const distribution_spec& prior, int n);

    const cache_options& options() const noexcept { return opts_; }
    // Number of nulls simulated by this object (not loaded).
    std::size_t simulated() const;

    std::string file_for(const distribution_spec& prior, int n) const;

private:
    using key = std::pair<std::string, int>;

    std::shared_ptr<const null_distribution> lookup(const key& k, const distribution_spec& std_prior, int n);
    std::optional<double> interpolated_p(const distribution_spec& std_prior, int n, double h_obs);

    cache_options opts_;
    mutable std::mutex mu_;
    std::map<key, std::shared_ptr<const null_distribution>> mem_;
    // One mutex per key so distinct sizes simulate concurrently.
    std::map<key, std::shared_ptr<std::mutex>> building_;
    std::size_t simulated_ = 0;
};

} // namespace hstar

#pragma once

#include <cstdint>
#include <numeric>
#include <string>
#include <vector>

#include "zrp/errors.hpp"

namespace zrp {

using Site = std::int64_t;

// Non-negative occupancies on a contiguous window of sites [x_lo, x_hi].
class Configuration {
public:
    Configuration() = default;

    Configuration(Site x_lo, std::vector<std::int64_t> occ) : x_lo_(x_lo), occ_(std::move(occ)) {
        if (occ_.empty()) throw WindowTooSmall("configuration window must contain a site");
        for (std::size_t i = 0; i < occ_.size(); ++i) {
            if (occ_[i] < 0)
                throw SiteOutOfWindow("negative occupancy at site " +
                                      std::to_string(x_lo_ + static_cast<Site>(i)));
        }
    }

    static Configuration constant(Site x_lo, std::size_t n_sites, std::int64_t value) {
        return Configuration(x_lo, std::vector<std::int64_t>(n_sites, value));
    }

    Site x_lo() const { return x_lo_; }
    Site x_hi() const { return x_lo_ + static_cast<Site>(occ_.size()) - 1; }
    std::size_t size() const { return occ_.size(); }

    bool contains(Site x) const { return x >= x_lo() && x <= x_hi(); }

    std::int64_t at(Site x) const {
        check(x);
        return occ_[static_cast<std::size_t>(x - x_lo_)];
    }

    std::int64_t& at(Site x) {
        check(x);
        return occ_[static_cast<std::size_t>(x - x_lo_)];
    }

    std::int64_t total() const {
        return std::accumulate(occ_.begin(), occ_.end(), std::int64_t{0});
    }

    const std::vector<std::int64_t>& occupancies() const { return occ_; }

    bool operator==(const Configuration&) const = default;

private:
    void check(Site x) const {
        if (!contains(x))
            throw SiteOutOfWindow("site " + std::to_string(x) + " outside window [" +
                                  std::to_string(x_lo()) + ", " + std::to_string(x_hi()) + "]");
    }

    Site x_lo_ = 0;
    std::vector<std::int64_t> occ_;
};

}  // namespace zrp

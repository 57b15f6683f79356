#ifndef ESPKIT_TRACE_IO_HPP
#define ESPKIT_TRACE_IO_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

#include "espkit/model.hpp"

namespace espkit {

class ParseError : public std::runtime_error {
public:
    explicit ParseError(const std::string& what) : std::runtime_error(what) {}
};

// CSV schema: header `slot,demand_mwh,price_per_mwh,renewable_mwh`, slots
// contiguous from 1.  Rejects gaps, duplicates and invariant breaches with
// the offending line number.
Trace read_trace_csv(const std::string& path);

// Fixed 6-decimal output; read_trace_csv(write_trace_csv(t)) is exact at
// that precision.
void write_trace_csv(const Trace& trace, const std::string& path);

struct SyntheticTraceParams {
    int horizon = 168;
    double demand_base = 20.0;      // MWh
    double demand_amplitude = 10.0; // diurnal swing
    double price_base = 30.0;       // $/MWh
    double price_amplitude = 15.0;
    double price_min = 5.0;         // clip band [m, M]
    double price_max = 60.0;
    double renew_fraction = 0.1;    // mean renewable as a share of demand
    double noise = 0.05;            // relative perturbation amplitude
    std::uint64_t seed = 1;

    void validate() const;
};

// Deterministic per seed; 24-slot diurnal shape; prices clipped to the band.
Trace generate_trace(const SyntheticTraceParams& params);

}  // namespace espkit

#endif

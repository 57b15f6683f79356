#include "espkit/trace_io.hpp"

#include <cmath>
#include <fstream>
#include <random>
#include <sstream>

namespace espkit {

namespace {

constexpr const char* kHeader = "slot,demand_mwh,price_per_mwh,renewable_mwh";

std::vector<std::string> split_csv(const std::string& line) {
    std::vector<std::string> fields;
    std::string field;
    std::istringstream in(line);
    while (std::getline(in, field, ',')) fields.push_back(field);
    if (!line.empty() && line.back() == ',') fields.push_back("");
    return fields;
}

double parse_number(const std::string& raw, int line_no, const char* what) {
    try {
        std::size_t used = 0;
        const double v = std::stod(raw, &used);
        while (used < raw.size() && std::isspace(static_cast<unsigned char>(raw[used]))) ++used;
        if (used != raw.size()) throw std::invalid_argument("trailing characters");
        return v;
    } catch (const std::exception&) {
        throw ParseError("line " + std::to_string(line_no) + ": malformed " + what + " '" +
                         raw + "'");
    }
}

// Uniform draw in [-1, 1]; mt19937_64 keeps traces reproducible per seed.
double symmetric(std::mt19937_64& rng) {
    return 2.0 * (static_cast<double>(rng() >> 11) * 0x1.0p-53) - 1.0;
}

}  // namespace

Trace read_trace_csv(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw ParseError("cannot open trace file: " + path);

    std::string line;
    int line_no = 0;
    if (!std::getline(in, line)) throw ParseError(path + ": empty file");
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line != kHeader)
        throw ParseError("line 1: expected header '" + std::string(kHeader) + "'");

    Trace trace;
    int expected = 1;
    while (std::getline(in, line)) {
        ++line_no;
        if (!line.empty() && line.back() == '\r') line.pop_back();
        if (line.empty()) continue;
        const auto fields = split_csv(line);
        if (fields.size() != 4)
            throw ParseError("line " + std::to_string(line_no) + ": expected 4 fields, got " +
                             std::to_string(fields.size()));
        const double slot_raw = parse_number(fields[0], line_no, "slot");
        const int slot = static_cast<int>(std::lround(slot_raw));
        if (std::abs(slot_raw - slot) > 1e-9)
            throw ParseError("line " + std::to_string(line_no) + ": slot must be an integer");
        if (slot < expected)
            throw ParseError("line " + std::to_string(line_no) + ": duplicate or out-of-order slot " +
                             std::to_string(slot));
        if (slot > expected)
            throw ParseError("line " + std::to_string(line_no) + ": missing slot " +
                             std::to_string(expected));
        SlotInput in_slot;
        in_slot.demand = parse_number(fields[1], line_no, "demand");
        in_slot.price = parse_number(fields[2], line_no, "price");
        in_slot.renewable = parse_number(fields[3], line_no, "renewable");
        if (in_slot.demand < 0.0)
            throw ParseError("line " + std::to_string(line_no) +
                             ": demand must be >= 0 (trace invariant)");
        if (!(in_slot.price > 0.0))
            throw ParseError("line " + std::to_string(line_no) +
                             ": price must be > 0 (trace invariant)");
        if (in_slot.renewable < 0.0)
            throw ParseError("line " + std::to_string(line_no) +
                             ": renewable must be >= 0 (trace invariant)");
        trace.slots.push_back(in_slot);
        ++expected;
    }
    if (trace.slots.empty()) throw ParseError(path + ": no data rows");
    return trace;
}

void write_trace_csv(const Trace& trace, const std::string& path) {
    std::ofstream out(path);
    if (!out) throw ParseError("cannot write trace file: " + path);
    out << kHeader << "\n";
    out << std::fixed;
    out.precision(6);
    for (int t = 1; t <= trace.horizon(); ++t) {
        const SlotInput& in = trace.at(t);
        out << t << ',' << in.demand << ',' << in.price << ',' << in.renewable << "\n";
    }
}

void SyntheticTraceParams::validate() const {
    if (horizon < 1) throw std::invalid_argument("generator: horizon must be >= 1");
    if (!(price_min > 0.0) || !(price_max >= price_min))
        throw std::invalid_argument("generator: need 0 < price_min <= price_max");
    if (renew_fraction < 0.0) throw std::invalid_argument("generator: renewable fraction < 0");
    if (noise < 0.0) throw std::invalid_argument("generator: noise < 0");
}

Trace generate_trace(const SyntheticTraceParams& params) {
    params.validate();
    std::mt19937_64 rng(params.seed);
    Trace trace;
    trace.slots.reserve(static_cast<std::size_t>(params.horizon));
    constexpr double kTau = 6.283185307179586;
    for (int t = 1; t <= params.horizon; ++t) {
        const int hour = (t - 1) % 24;
        // Demand and price peak mid-afternoon, trough before dawn.
        const double shape = std::sin(kTau * (hour - 9) / 24.0);
        SlotInput in;
        in.demand = std::max(0.0, params.demand_base + params.demand_amplitude * shape +
                                      params.demand_base * params.noise * symmetric(rng));
        in.price = params.price_base + params.price_amplitude * shape +
                   params.price_base * params.noise * symmetric(rng);
        in.price = std::min(params.price_max, std::max(params.price_min, in.price));
        in.renewable = std::max(0.0, params.renew_fraction * in.demand *
                                         (1.0 + params.noise * symmetric(rng)));
        trace.slots.push_back(in);
    }
    return trace;
}

}  // namespace espkit

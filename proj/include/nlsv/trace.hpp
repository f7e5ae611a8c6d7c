#pragma once

#include "nlsv/grid.hpp"

namespace nlsv {

/// Time-indexed evolution record.  sign: +1 focusing, -1 defocusing.
/// mass/energy/sobolev_h1 entries are recomputable from the stored fields.
struct EvolutionTrace {
    int sign = -1;
    std::vector<double> times;
    std::vector<Field> fields;
    std::vector<double> mass;
    std::vector<double> energy;
    std::vector<double> sobolev_h1;
};

}  // namespace nlsv

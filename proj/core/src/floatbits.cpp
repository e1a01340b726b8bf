#include "cled/floatbits.hpp"

#include <string>

namespace cled {

double bit_average(std::span<const float> params, BitPosition pos) {
    require_valid(pos);
    if (params.empty()) {
        throw PreconditionError("bit_average requires a non-empty parameter sequence");
    }
    const std::uint32_t mask = pos.mask();
    std::size_t ones = 0;
    for (float value : params) {
        if (BitWord32::from_float(value).raw & mask) {
            ++ones;
        }
    }
    return static_cast<double>(ones) / static_cast<double>(params.size());
}

} // namespace cled

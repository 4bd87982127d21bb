#include "speckle/errors.hpp"

namespace speckle {

namespace {

std::string join(const std::vector<std::string>& items) {
    std::string out;
    for (const auto& item : items) {
        if (!out.empty()) out += "; ";
        out += item;
    }
    return out;
}

}  // namespace

ValidationError::ValidationError(std::vector<std::string> violations)
    : std::invalid_argument(join(violations)), violations_(std::move(violations)) {}

}  // namespace speckle

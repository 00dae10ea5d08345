#include "nessqfi/estimate.hpp"

#include <string>

#include "nessqfi/errors.hpp"

namespace nessqfi {

Parameter parse_parameter(std::string_view label) {
    if (label == "J" || label == "j") return Parameter::J;
    if (label == "delta" || label == "Delta") return Parameter::delta;
    if (label == "lambda") return Parameter::lambda;
    if (label == "mu") return Parameter::mu;
    throw PreconditionError("unknown parameter label '" + std::string(label) + "'");
}

std::string_view to_string(Parameter p) {
    switch (p) {
    case Parameter::J: return "J";
    case Parameter::delta: return "delta";
    case Parameter::lambda: return "lambda";
    case Parameter::mu: return "mu";
    }
    return "?";
}

std::string_view to_string(FisherMethod m) {
    return m == FisherMethod::exact_dense ? "exact-dense" : "leading-order";
}

} // namespace nessqfi

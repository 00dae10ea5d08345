#pragma once

#include <string_view>

#include "nessqfi/log_real.hpp"
#include "nessqfi/model.hpp"

namespace nessqfi {

/// Parameter a Fisher information refers to.
enum class Parameter { J, delta, lambda, mu };

enum class FisherMethod { exact_dense, leading_order };

Parameter parse_parameter(std::string_view label);
std::string_view to_string(Parameter p);
std::string_view to_string(FisherMethod m);

/// Fisher value tagged with how it was computed.
struct FisherEstimate {
    LogReal value;
    FisherMethod method = FisherMethod::leading_order;
    Parameter parameter = Parameter::lambda;
    ChainParams params;

    double linear() const { return value.to_double(); }
};

} // namespace nessqfi

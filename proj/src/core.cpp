#include "ersatz/core.hpp"

#include <sstream>

namespace ersatz {

QualityLabel parse_quality(const std::string& rendered) {
    auto pos = rendered.rfind('_');
    if (pos == std::string::npos || pos == 0 || pos + 1 == rendered.size()) {
        throw ParseError("malformed quality label: " + rendered);
    }
    const std::string suffix = rendered.substr(pos + 1);
    for (char c : suffix) {
        if (c < '0' || c > '9') {
            throw ParseError("malformed quality label: " + rendered);
        }
    }
    int number = 0;
    try {
        number = std::stoi(suffix);
    } catch (const std::exception&) {
        throw ParseError("malformed quality label: " + rendered);
    }
    if (number < 1) {
        throw ParseError("quality label index must be >= 1: " + rendered);
    }
    return QualityLabel{rendered.substr(0, pos), number - 1};
}

std::string to_string(const QualitySet& qs) {
    std::ostringstream out;
    out << "{";
    bool first = true;
    for (const auto& q : qs) {
        if (!first) out << ", ";
        out << q.rendered();
        first = false;
    }
    out << "}";
    return out.str();
}

void check_config(const ReasonerConfig& config) {
    if (config.eta < 2) {
        throw DomainError("eta must be >= 2, got " +
                          std::to_string(config.eta));
    }
    if (!(config.theta > 0.0 && config.theta <= 1.0)) {
        throw DomainError("theta must be in (0,1], got " +
                          std::to_string(config.theta));
    }
    if (!(config.phi >= 0.0 && config.phi < 1.0)) {
        throw DomainError("phi must be in [0,1), got " +
                          std::to_string(config.phi));
    }
}

}  // namespace ersatz

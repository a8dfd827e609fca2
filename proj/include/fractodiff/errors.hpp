#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace fractodiff {

// bad arguments, broken preconditions
struct domain_error : std::invalid_argument {
    using std::invalid_argument::invalid_argument;
};

struct pole_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct singularity_error : std::domain_error {
    using std::domain_error::domain_error;
};

struct resolution_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct divergence_error : std::runtime_error {
    using std::runtime_error::runtime_error;
};

// tolerance could not be met; best available value is kept
struct accuracy_error : std::runtime_error {
    double best_estimate;
    double est_abs_error;
    accuracy_error(const std::string& what, double best, double err)
        : std::runtime_error(what), best_estimate(best), est_abs_error(err) {}
};

// concentration did not settle; the last two iterates travel with the error
struct concentration_error : accuracy_error {
    std::vector<double> last;
    std::vector<double> previous;
    concentration_error(const std::string& what, double cauchy,
                        std::vector<double> last_iterate, std::vector<double> previous_iterate)
        : accuracy_error(what, cauchy, cauchy),
          last(std::move(last_iterate)), previous(std::move(previous_iterate)) {}
};

}  // namespace fractodiff

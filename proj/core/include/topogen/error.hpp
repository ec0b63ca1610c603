#pragma once

#include <stdexcept>
#include <string>

namespace topogen {

// Invalid input, unusable file, bad configuration. CLI maps this to exit 2.
class InputError : public std::runtime_error {
public:
    explicit InputError(const std::string& what) : std::runtime_error(what) {}
};

// A training loss became non-finite. CLI maps this to exit 3.
class DivergenceError : public std::runtime_error {
public:
    DivergenceError(const std::string& what, long step)
        : std::runtime_error(what), step_(step) {}
    long step() const { return step_; }

private:
    long step_;
};

} // namespace topogen

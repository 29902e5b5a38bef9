#include "natboost/common.hpp"

#include <iostream>
#include <mutex>

namespace natboost {

void warn(const std::string& message) {
    static std::mutex mu;
    std::lock_guard<std::mutex> lock(mu);
    std::cerr << "[natboost] warning: " << message << '\n';
}

}  // namespace natboost

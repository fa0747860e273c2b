#pragma once

#include <initializer_list>
#include <string>

#include <nlohmann/json.hpp>

#include "duo/error.hpp"

namespace duo::detail {

inline void reject_unknown_keys(const nlohmann::json& j, std::initializer_list<const char*> allowed,
                                const std::string& what) {
    if (!j.is_object()) throw ValidationError(what + ": expected a JSON object");
    for (const auto& item : j.items()) {
        bool ok = false;
        for (const char* key : allowed) ok = ok || item.key() == key;
        if (!ok) throw ValidationError(what + ": unknown key '" + item.key() + "'");
    }
}

inline double number_at(const nlohmann::json& j, const char* key, const std::string& what) {
    if (!j.contains(key) || !j.at(key).is_number()) {
        throw ValidationError(what + ": missing numeric '" + key + "'");
    }
    return j.at(key).get<double>();
}

inline std::size_t count_at(const nlohmann::json& j, const char* key, const std::string& what) {
    if (!j.contains(key) || !j.at(key).is_number_integer() || j.at(key).get<long long>() < 0) {
        throw ValidationError(what + ": '" + key + "' must be a nonnegative integer");
    }
    return j.at(key).get<std::size_t>();
}

inline std::string string_at(const nlohmann::json& j, const char* key, const std::string& what) {
    if (!j.contains(key) || !j.at(key).is_string()) {
        throw ValidationError(what + ": missing string '" + key + "'");
    }
    return j.at(key).get<std::string>();
}

}  // namespace duo::detail

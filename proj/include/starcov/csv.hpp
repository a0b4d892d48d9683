// SPDX-License-Identifier: Apache-2.0
//
// starcov: coverage analysis and passive beamforming for STAR-RIS massive MIMO
// Copyright (C) 2026 The starcov Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------

#pragma once

#include <charconv>
#include <cmath>
#include <ostream>
#include <string>
#include <string_view>
#include <system_error>
#include <type_traits>
#include <vector>

namespace starcov::csv {

/// Locale-free formatting with 17 significant digits.
inline std::string format(double value) {
    if (std::isnan(value))
        return "nan";
    if (std::isinf(value))
        return value > 0 ? "inf" : "-inf";
    char buf[64];
    auto [end, ec] = std::to_chars(buf, buf + sizeof(buf), value, std::chars_format::general, 17);
    if (ec != std::errc())
        return "nan";
    return std::string(buf, end);
}

template <typename Int>
    requires std::is_integral_v<Int>
std::string format(Int value) {
    return std::to_string(value);
}
inline std::string format(std::string_view value) { return std::string(value); }
inline std::string format(const char* value) { return std::string(value); }
inline std::string format(const std::string& value) { return value; }

/// Writes comma-separated rows terminated by '\n'.
class Writer {
public:
    explicit Writer(std::ostream& os) : os_(os) {}

    template <typename... Fields>
    void row(const Fields&... fields) {
        bool first = true;
        ((os_ << (first ? "" : ",") << format(fields), first = false), ...);
        os_ << '\n';
    }

    void row(const std::vector<std::string>& fields) {
        for (std::size_t i = 0; i < fields.size(); ++i)
            os_ << (i ? "," : "") << fields[i];
        os_ << '\n';
    }

private:
    std::ostream& os_;
};

} // namespace starcov::csv

#pragma once

#include <string>

namespace fixtures {

inline const std::string square = R"(lipgerm v1
component closed
x = t; y = t
x = -t; y = t
x = -t; y = -t
x = t; y = -t
)";

// triangle A B C with a tail from A pointing into the triangle
inline const std::string x1 = R"(lipgerm v1
component closed
x = 0; y = 0
x = t^2; y = t^2
x = t^2; y = -t^2
component open
x = 0; y = 0
x = t^3; y = 0
)";

// same triangle, tail pointing away from it
inline const std::string x2 = R"(lipgerm v1
component closed
x = 0; y = 0
x = t^2; y = t^2
x = t^2; y = -t^2
component open
x = 0; y = 0
x = -t^3; y = 0
)";

inline const std::string pinch = R"(lipgerm v1
component open
x = t; y = t^2
x = 0; y = 0
x = t; y = -t^2
)";

inline const std::string nested_squares = R"(lipgerm v1
component closed
x = t; y = t
x = -t; y = t
x = -t; y = -t
x = t; y = -t
component closed
x = t^2; y = t^2
x = -t^2; y = t^2
x = -t^2; y = -t^2
x = t^2; y = -t^2
)";

inline const std::string disjoint_squares = R"(lipgerm v1
component closed
x = 2*t; y = t
x = t; y = t
x = t; y = -t
x = 2*t; y = -t
component closed
x = -t; y = t
x = -2*t; y = t
x = -2*t; y = -t
x = -t; y = -t
)";

} // namespace fixtures

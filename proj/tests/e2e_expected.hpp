#pragma once

// Hand-computed values for the fixture in tests/data/e2e, produced by
// tests/oracles/e2e_oracle.py (exact fractions, 50-digit logs and powers).

#include <array>
#include <map>
#include <string>

namespace e2e {

struct Flags {
    bool teamwork, customer, communication, presence;
};

inline const std::map<std::string, Flags> kFlags = {
    {"29-1141", {true, true, true, false}},  {"35-2014", {false, true, true, true}},
    {"41-2031", {false, true, true, false}}, {"43-9061", {false, false, false, false}},
    {"51-1011", {true, false, true, false}}, {"53-3032", {false, false, false, true}},
};

// teamwork, customer, communication, presence
inline const std::map<std::string, std::array<double, 4>> kChi = {
    {"31-33", {1.0 / 10, 0.0, 1.0 / 10, 3.0 / 5}},
    {"44-45", {1.0 / 5, 4.0 / 5, 4.0 / 5, 1.0 / 10}},
    {"622", {4.0 / 5, 4.0 / 5, 4.0 / 5, 0.0}},
    {"72", {1.0 / 10, 3.0 / 5, 7.0 / 10, 3.0 / 10}},
};

inline const std::map<std::pair<std::string, std::string>, double> kCellEmployment = {
    {{"10001", "311811"}, 34.5}, {{"10001", "445110"}, 10.0}, {{"10001", "722511"}, 29.0},
    {{"10002", "332710"}, 6.5},  {{"10002", "445110"}, 21.0}, {{"10002", "722511"}, 5.0},
    {{"20001", "311811"}, 14.0}, {{"20001", "332710"}, 74.5}, {{"20001", "452210"}, 14.5},
    {{"30001", "332710"}, 5.0},  {{"30001", "622110"}, 174.5}, {{"30001", "722511"}, 30.0},
};

inline const std::map<std::string, double> kDensity = {
    {"10001", 83700.0 / 17449}, {"10002", 16740.0 / 17449}, {"20001", 4185.0 / 17449}, {"30001", 837.0 / 17449},
};

inline const std::map<std::string, std::array<double, 4>> kRegionShares = {
    {"10001", {167.0 / 1470, 254.0 / 735, 127.0 / 294, 304.0 / 735}},
    {"10002", {107.0 / 650, 198.0 / 325, 419.0 / 650, 3.0 / 13}},
    {"20001", {47.0 / 412, 58.0 / 515, 409.0 / 2060, 1091.0 / 2060}},
    {"30001", {1431.0 / 2095, 1576.0 / 2095, 1611.0 / 2095, 24.0 / 419}},
};

inline constexpr double kK = 0.46075013815121705814;
inline constexpr double kEps = 0.086814949552705502881;
inline constexpr double kCap = 0.48546029893017604882;

inline const std::map<std::pair<std::string, std::string>, double> kLambda = {
    {{"10001", "311811"}, 0.14390156803810615646}, {{"10001", "445110"}, 0.9839853525220293351},
    {{"10001", "722511"}, 0.92502505852403815596}, {{"10002", "332710"}, 0.12660388217022275344},
    {{"10002", "445110"}, 0.98177763428070414694}, {{"10002", "722511"}, 0.91557154282341162696},
    {{"20001", "311811"}, 0.11082109138529569582}, {{"20001", "332710"}, 0.11082109138529569582},
    {{"20001", "452210"}, 0.97962029994456723584}, {{"30001", "332710"}, 0.091322015110485678116},
    {{"30001", "722511"}, 0.89429045617360526088},
};

inline const std::map<std::string, double> kSectorLambda = {
    {"31-33", 0.11934428248752570829}, {"44-45", 0.98157534492991879904}, {"72", 0.90987965775816128882}};
inline const std::map<std::string, double> kLocationLambda = {
    {"10001", 0.56639706557458588125}, {"10002", 0.80055733132671671132},
    {"20001", 0.23312777608538732038}, {"30001", 0.77958067887887389192}};
inline const std::map<std::string, double> kRegionLambda = {{"NYC", 0.63819148667783354141},
                                                            {"Rest", 0.37172090360547449432}};
inline constexpr double kOverallLambda = 0.48748271428445014593;
inline constexpr double kModelEmployment = 244.0;

}  // namespace e2e

#pragma once

#include <array>
#include <cstdint>
#include <string_view>

// Published detection results: confusion counts and the reported metrics.
namespace table2 {

struct Row {
    std::string_view cheat, split, subsystem;
    std::int64_t tp, tn, fp, fn;
    double accuracy, recall, npv, oei;
};

inline constexpr std::array<Row, 16> kRows{{
    {"aimbot", "validation", "RevPov", 458, 4796, 2901, 406, .614, .530, .922, 1.246},
    {"aimbot", "validation", "RevStats", 453, 7290, 407, 411, .904, .524, .947, 4.941},
    {"aimbot", "validation", "ExSPC", 553, 6187, 1510, 311, .787, .640, .952, 2.529},
    {"aimbot", "validation", "HAWK", 614, 5803, 1894, 250, .750, .711, .959, 2.326},
    {"aimbot", "test", "RevPov", 481, 5088, 3075, 403, .616, .544, .927, 1.283},
    {"aimbot", "test", "RevStats", 566, 6797, 1366, 318, .814, .640, .955, 2.864},
    {"aimbot", "test", "ExSPC", 558, 6616, 1547, 326, .793, .631, .953, 2.586},
    {"aimbot", "test", "HAWK", 642, 5837, 2326, 242, .716, .726, .960, 2.126},
    {"wallhack", "validation", "RevPov", 573, 6081, 2664, 394, .685, .593, .939, 1.670},
    {"wallhack", "validation", "RevStats", 604, 8241, 504, 363, .911, .625, .958, 4.143},
    {"wallhack", "validation", "ExSPC", 760, 7258, 1487, 207, .826, .786, .972, 3.303},
    {"wallhack", "validation", "HAWK", 798, 7033, 1712, 169, .806, .825, .977, 3.118},
    {"wallhack", "test", "RevPov", 627, 6364, 2885, 398, .680, .612, .941, 1.684},
    {"wallhack", "test", "RevStats", 855, 6988, 2261, 170, .763, .834, .976, 1.946},
    {"wallhack", "test", "ExSPC", 501, 8484, 765, 524, .875, .489, .942, 3.736},
    {"wallhack", "test", "HAWK", 869, 6902, 2347, 156, .756, .848, .978, 2.649},
}};

} // namespace table2

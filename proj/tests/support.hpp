#pragma once

// Shared fixtures and generators for the test suites.

#include <random>
#include <string>
#include <vector>

#include "biokg/schema.hpp"

namespace testsupport {

inline std::string data_dir() { return BIOKG_TEST_DATA_DIR; }

// The English-keyed sample output JSON (courtesy-name biography of Zeng
// Guofan) used as the canonical fixture across suites.
inline const char* sample_person_json() {
    return R"JSON({
    "Name": "Zeng Guofan",
    "Aliases": "Courtesy name Bohan, pseudonym Disheng",
    "Gender": "Male",
    "Era": "Mid-to-late Qing Dynasty",
    "Place of Origin": "Xiangxiang, Hunan (present-day Heye Town, Shuangfeng County, Hunan Province)",
    "Date of Birth": "November 26, 1811",
    "Date of Death": "March 12, 1872",
    "Major Achievements": {
        "influence": "Founded the Xiang Army; his military philosophy influenced subsequent generations",
        "location": "Hunan",
        "Date": "1853"
    }
})JSON";
}

inline std::string random_text(std::mt19937_64& rng, bool allow_empty = true) {
    static const std::vector<std::string> pool = {
        "",       "曾国藩",   "字伯涵",     "湘军",     "晚清重臣", "军事家",   "Hunan",
        "1853",   "未知",     "湖南湘乡",   "《家书》", "理学家",   "1811年",   "创立湘军",
        "Male",   "男",       "汉族",       "道光年间", "两江总督", "京师",     "同治",
    };
    std::size_t index = rng() % pool.size();
    if (!allow_empty && pool[index].empty()) index = 1;
    return pool[index];
}

inline biokg::PersonRecord random_record(std::mt19937_64& rng) {
    biokg::PersonRecord rec;
    rec.name = random_text(rng, /*allow_empty=*/false);
    rec.alias = random_text(rng);
    rec.gender = random_text(rng);
    rec.ethnicity = random_text(rng);
    rec.era = random_text(rng);
    rec.birthplace = random_text(rng);
    rec.birth_date = random_text(rng);
    rec.death_date = random_text(rng);
    rec.works = random_text(rng);
    rec.field_domain = random_text(rng);
    const std::size_t n_ach = rng() % 3;
    for (std::size_t i = 0; i < n_ach; ++i)
        rec.achievements.push_back({random_text(rng), random_text(rng), random_text(rng)});
    const std::size_t n_soc = rng() % 3;
    for (std::size_t i = 0; i < n_soc; ++i)
        rec.social_relations.push_back({random_text(rng), random_text(rng)});
    const std::size_t n_fam = rng() % 2;
    for (std::size_t i = 0; i < n_fam; ++i)
        rec.family_relations.push_back({random_text(rng), random_text(rng)});
    const std::size_t n_pos = rng() % 3;
    for (std::size_t i = 0; i < n_pos; ++i)
        rec.positions.push_back({random_text(rng), random_text(rng)});
    return rec;
}

}  // namespace testsupport

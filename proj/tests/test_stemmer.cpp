#include <doctest.h>

#include "qcopt/io.hpp"
#include "qcopt/stemmer.hpp"
#include "support.hpp"

using namespace qcopt;

TEST_CASE("classic examples") {
    CHECK(porter_stem("caresses") == "caress");
    CHECK(porter_stem("ponies") == "poni");
    CHECK(porter_stem("relational") == "relat");
    CHECK(porter_stem("hopping") == "hop");
    CHECK(porter_stem("filing") == "file");
    CHECK(porter_stem("generalizations") == "gener");
    CHECK(porter_stem("") == "");
}

TEST_CASE("golden stems") {
    const auto doc = read_json_file(test::data_dir() / "fixtures" / "porter_golden.json");
    int mismatches = 0, total = 0;
    for (const auto& c : doc.at("cases")) {
        const auto word = c.at("word").get<std::string>();
        const auto expected = c.at("stem").get<std::string>();
        ++total;
        if (porter_stem(word) != expected) {
            ++mismatches;
            MESSAGE(word << " -> " << porter_stem(word) << ", expected " << expected);
        }
    }
    CHECK(total > 5000);
    CHECK(mismatches == 0);
}

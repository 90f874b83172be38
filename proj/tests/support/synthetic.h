#pragma once

#include <cstdint>
#include <memory>
#include <random>
#include <string>
#include <vector>

#include "swb/model.h"
#include "swb/session.h"

namespace swb::testing {

// CREATE TABLE statements for `tables` tables whose tables plus columns add
// up to exactly `elements`; every table gets at least one column.
std::string synthetic_ddl(std::uint64_t seed, std::size_t tables = 140,
                          std::size_t elements = 1378);

// Named complex types with at least `min_members` string members each, for
// exactly `elements` elements in total.
std::string synthetic_xsd(std::uint64_t seed, std::size_t types = 51, std::size_t elements = 784,
                          std::size_t min_members = 12);

// Parsed synthetic pair: "left" from DDL, "right" from XSD.
std::shared_ptr<const Schema> synthetic_left(std::uint64_t seed);
std::shared_ptr<const Schema> synthetic_right(std::uint64_t seed);

// Small random tree for property tests: names drawn from a shared word list,
// so independently drawn schemata overlap.
Schema random_schema(std::mt19937_64& rng, const std::string& id, std::size_t max_elements,
                     int max_depth = 3);

// Fixed, strictly increasing timestamps.
Session::Clock stepping_clock(std::int64_t start_ms = 1'700'000'000'000);

// A session over two random schemata with random concept assignments,
// decisions (legal transitions only) and derived concept matches.
Session random_session(std::uint64_t seed);

// Resolver for load_session over schemata held in memory.
SessionEnvironment memory_environment(const std::vector<std::shared_ptr<const Schema>>& schemas);

}  // namespace swb::testing

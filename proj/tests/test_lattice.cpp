#include <gtest/gtest.h>

#include <set>

#include "nlwave/lattice.hpp"

using namespace nlwave;

TEST(GridSpec, HorizonMustBeMultipleOfMesh) {
    auto g = grid_spec::make(1, 1.0 / 32, 0.25, 2.0);
    EXPECT_EQ(g.L, 8);
    EXPECT_EQ(g.M, 64);
    EXPECT_THROW(grid_spec::make(1, 0.3, 1.0, 2.0), config_error);
    EXPECT_THROW(grid_spec::make(1, 0.25, 1.0, 1.0), config_error);   // M = L
}

TEST(Regions, SizesAndPartition) {
    for (int dim : {1, 2}) {
        const int M = 7, L = 3;
        auto count = [&](region r) { return enumerate(r, M, L, dim).size(); };
        auto cube = [&](int R) { return static_cast<std::size_t>(dim == 1 ? 2 * R - 1 : (2 * R - 1) * (2 * R - 1)); };
        EXPECT_EQ(count(region::interior), cube(M));
        EXPECT_EQ(count(region::inner_core), cube(M - L));
        EXPECT_EQ(count(region::inner_layer), cube(M) - cube(M - L));
        EXPECT_EQ(count(region::extended), cube(M + L));
        EXPECT_EQ(count(region::ghost_layer), cube(M + L) - cube(M));

        std::set<multi_index> core, inner, interior;
        for (auto k : enumerate(region::inner_core, M, L, dim)) core.insert(k);
        for (auto k : enumerate(region::inner_layer, M, L, dim)) inner.insert(k);
        for (auto k : enumerate(region::interior, M, L, dim)) interior.insert(k);
        for (auto k : inner) EXPECT_FALSE(core.count(k));
        std::set<multi_index> both = core;
        both.insert(inner.begin(), inner.end());
        EXPECT_EQ(both, interior);
        EXPECT_TRUE(in_region(region::exterior, {M, 0}, M, L, dim));
        EXPECT_FALSE(in_region(region::exterior, {M - 1, 0}, M, L, dim));
    }
}

TEST(Regions, OneDimensionalEnumerationIsAscending) {
    auto inner = enumerate(region::inner_layer, 5, 2, 1);
    std::vector<int> xs;
    for (auto k : inner) xs.push_back(k[0]);
    EXPECT_EQ(xs, (std::vector<int>{-4, -3, 3, 4}));
    auto ghost = enumerate(region::ghost_layer, 5, 2, 1);
    xs.clear();
    for (auto k : ghost) xs.push_back(k[0]);
    EXPECT_EQ(xs, (std::vector<int>{-6, -5, 5, 6}));
}

TEST(BoxLattice, IndexRoundTrip) {
    for (int dim : {1, 2}) {
        box_lattice lat{dim, 5};
        for (int i = 0; i < lat.size(); ++i) EXPECT_EQ(lat.index(lat.at(i)), i);
        lattice_field u(lat);
        EXPECT_THROW(u.value_or_throw({5, 0}), out_of_range_error);
        EXPECT_NO_THROW(u.value_or_throw({4, 0}));
    }
}

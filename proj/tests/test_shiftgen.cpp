// Copyright 2026 the driftbench authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include <gtest/gtest.h>

#include <cmath>
#include <filesystem>
#include <fstream>

#include "driftbench/errors.hpp"
#include "driftbench/shiftgen/embedding_io.hpp"
#include "driftbench/shiftgen/shift.hpp"
#include "driftbench/shiftgen/world.hpp"

using namespace driftbench;
namespace fs = std::filesystem;

namespace {

WorldSpec SmallWorld(std::uint64_t seed = 1) {
    WorldSpec w;
    w.dim = 8;
    w.classes = 3;
    w.groups = 4;
    w.per_class_per_group = 40;
    w.seed = seed;
    return w;
}

fs::path TmpDir() {
    const fs::path p = fs::path(DRIFTBENCH_TEST_TMP) / "shiftgen";
    fs::create_directories(p);
    return p;
}

Vec ColumnMean(const Matrix& m) {
    Vec mean, var;
    column_moments(m, mean, var);
    return mean;
}

// Mean squared distance of each row to its class mean.
double WithinClassTrace(const Dataset& d, std::size_t classes) {
    double total = 0.0;
    for (std::size_t c = 0; c < classes; ++c) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < d.size(); ++r)
            if (d.labels[r] == static_cast<int>(c)) rows.push_back(r);
        const Matrix sub = d.embeddings.gather_rows(rows);
        Vec mean, var;
        column_moments(sub, mean, var);
        for (double v : var) total += v * static_cast<double>(rows.size());
    }
    return total / static_cast<double>(d.size());
}

}  // namespace

TEST(World, DeterministicInSeed) {
    EXPECT_EQ(gen_world(SmallWorld(3)).data, gen_world(SmallWorld(3)).data);
    EXPECT_NE(gen_world(SmallWorld(3)).data.embeddings, gen_world(SmallWorld(4)).data.embeddings);
}

TEST(World, CountsAndLayout) {
    const World w = gen_world(SmallWorld());
    EXPECT_EQ(w.data.size(), 3u * 4u * 40u);
    EXPECT_EQ(w.data.dim(), 8u);
    for (int c = 0; c < 3; ++c) EXPECT_EQ(std::count(w.data.labels.begin(), w.data.labels.end(), c), 160);
    for (int g = 0; g < 4; ++g) EXPECT_EQ(std::count(w.data.groups.begin(), w.data.groups.end(), g), 120);
    EXPECT_TRUE(std::is_sorted(w.data.groups.begin(), w.data.groups.end()));
    EXPECT_TRUE(w.data.fully_labeled());
}

TEST(World, EmpiricalClassMeansSitOnTheSphere) {
    WorldSpec spec;
    spec.seed = 5;
    spec.per_class_per_group = 1000;
    const World w = gen_world(spec);
    for (std::size_t c = 0; c < spec.classes; ++c) {
        std::vector<std::size_t> rows;
        for (std::size_t r = 0; r < w.data.size(); ++r)
            if (w.data.labels[r] == static_cast<int>(c)) rows.push_back(r);
        const Vec mean = ColumnMean(w.data.embeddings.gather_rows(rows));
        EXPECT_NEAR(norm2(mean), spec.radius, 0.05 * spec.radius) << c;
        EXPECT_NEAR(norm2(w.class_means.row(c)), spec.radius, 1e-12);
    }
}

TEST(World, SampleSeedKeepsStructure) {
    WorldSpec a = SmallWorld(2), b = SmallWorld(2);
    b.sample_seed = 77;
    const World wa = gen_world(a), wb = gen_world(b);
    EXPECT_EQ(wa.class_means, wb.class_means);
    EXPECT_NE(wa.data.embeddings, wb.data.embeddings);
}

TEST(World, Validation) {
    WorldSpec w = SmallWorld();
    w.classes = 1;
    EXPECT_THROW(w.validate(), UsageError);
    w = SmallWorld();
    w.within_std = -1;
    EXPECT_THROW(w.validate(), UsageError);
}

TEST(Shift, SeverityZeroIsIdentity) {
    const Dataset d = gen_world(SmallWorld()).data;
    for (ShiftKind k : {ShiftKind::kGroupOffset, ShiftKind::kStyle, ShiftKind::kCorpusAffine}) {
        ShiftSpec s;
        s.kind = k;
        s.severity = 0;
        EXPECT_EQ(apply_shift(d, s, 9), d) << shift_kind_name(k);
    }
}

TEST(Shift, PureBiasMovesTheMean) {
    const Dataset d = gen_world(SmallWorld()).data;
    ShiftSpec s;
    s.kind = ShiftKind::kCorpusAffine;
    s.severity = 3;
    s.affine_eps = 0.0;
    Vec delta(8, 0.0);
    delta[2] = 1.5;
    s.affine_bias = delta;
    const Dataset out = apply_shift(d, s, 4);
    const Vec before = ColumnMean(d.embeddings), after = ColumnMean(out.embeddings);
    for (std::size_t j = 0; j < 8; ++j) EXPECT_NEAR(after[j] - before[j], delta[j], 1e-12);
}

TEST(Shift, StyleInflatesWithinClassSpread) {
    const Dataset d = gen_world(SmallWorld()).data;
    ShiftSpec s;
    s.kind = ShiftKind::kStyle;
    s.severity = 5;
    EXPECT_GT(WithinClassTrace(apply_shift(d, s, 1), 3), WithinClassTrace(d, 3));
}

TEST(Shift, MetadataPassesThrough) {
    const Dataset d = gen_world(SmallWorld()).data;
    for (ShiftKind k : {ShiftKind::kGroupOffset, ShiftKind::kStyle, ShiftKind::kCorpusAffine}) {
        ShiftSpec s;
        s.kind = k;
        s.severity = 4;
        const Dataset out = apply_shift(d, s, 2);
        EXPECT_EQ(out.labels, d.labels);
        EXPECT_EQ(out.groups, d.groups);
        EXPECT_EQ(out.ids, d.ids);
        EXPECT_EQ(apply_shift(d, s, 2), out);
    }
}

TEST(Shift, DisplacementGrowsWithSeverity) {
    const Dataset d = gen_world(SmallWorld()).data;
    for (ShiftKind k : {ShiftKind::kGroupOffset, ShiftKind::kStyle, ShiftKind::kCorpusAffine}) {
        double prev = 0.0;
        for (int sev = 1; sev <= kMaxSeverity; ++sev) {
            ShiftSpec s;
            s.kind = k;
            s.severity = sev;
            const Dataset out = apply_shift(d, s, 6);
            double disp = 0.0;
            for (std::size_t i = 0; i < d.embeddings.size(); ++i) {
                const double e = out.embeddings.values()[i] - d.embeddings.values()[i];
                disp += e * e;
            }
            EXPECT_GT(disp, prev) << shift_kind_name(k) << " " << sev;
            prev = disp;
        }
    }
}

TEST(Shift, ValidationAndNames) {
    ShiftSpec s;
    s.severity = 6;
    EXPECT_THROW(s.validate(), UsageError);
    s.severity = -1;
    EXPECT_THROW(s.validate(), UsageError);
    EXPECT_EQ(corpus_affine_eps(0), 0.0);
    EXPECT_EQ(corpus_affine_eps(5), 0.5);
    for (ShiftKind k : {ShiftKind::kGroupOffset, ShiftKind::kStyle, ShiftKind::kCorpusAffine})
        EXPECT_EQ(parse_shift_kind(shift_kind_name(k)), k);
    EXPECT_THROW(parse_shift_kind("tilt"), UsageError);
}

TEST(EmbeddingIo, BinaryRoundTripIsBitIdentical) {
    Dataset d = gen_world(SmallWorld()).data;
    d.labels[3] = kUnlabeled;
    const fs::path p = TmpDir() / "rt.ttae";
    write_embeddings(p, d, EmbeddingFormat::kBinary);
    const Dataset back = read_embeddings(p);
    EXPECT_EQ(back, d);
    EXPECT_EQ(back.labels[3], -1);
    EXPECT_FALSE(back.fully_labeled());
    EXPECT_FALSE(back.to_batch().labels.has_value());
}

TEST(EmbeddingIo, CsvRoundTripIsExact) {
    const Dataset d = gen_world(SmallWorld(8)).data;
    const fs::path p = TmpDir() / "rt.csv";
    write_embeddings(p, d, embedding_format_for(p));
    EXPECT_EQ(read_embeddings(p), d);
    std::ifstream in(p);
    std::string header;
    std::getline(in, header);
    EXPECT_EQ(header.rfind("id,group,label,f0,", 0), 0u);
}

TEST(EmbeddingIo, TruncatedFileReportsOffset) {
    const Dataset d = gen_world(SmallWorld()).data;
    const fs::path p = TmpDir() / "trunc.ttae";
    write_embeddings(p, d, EmbeddingFormat::kBinary);
    fs::resize_file(p, fs::file_size(p) - 5);
    try {
        read_embeddings(p);
        FAIL() << "expected DataError";
    } catch (const DataError& e) {
        EXPECT_NE(std::string(e.what()).find("offset"), std::string::npos) << e.what();
    }
}

TEST(EmbeddingIo, MalformedCsvIsADataError) {
    const fs::path p = TmpDir() / "bad.csv";
    std::ofstream(p) << "id,group,label,f0\n1,0,0,abc\n";
    EXPECT_THROW(read_embeddings(p), DataError);
    EXPECT_THROW(read_embeddings(TmpDir() / "missing.csv"), DataError);
}

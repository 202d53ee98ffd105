// SPDX-License-Identifier: Apache-2.0
#include "clab/data/synthetic.hpp"

#include <algorithm>
#include <cmath>

namespace clab::data {

void SyntheticSpec::validate() const
{
    require<ConfigError>(num_classes >= 2, "num_classes must be >= 2");
    require<ConfigError>(locations_per_class >= 1, "locations_per_class must be >= 1");
    require<ConfigError>(views_per_location >= 1, "views_per_location must be >= 1");
    require<ConfigError>(image_size >= 2, "image_size must be >= 2");
    require<ConfigError>(channels >= 1, "channels must be >= 1");
    require<ConfigError>(texture_cells >= 2 && texture_cells <= image_size,
                         "texture_cells must be in [2, image_size]");
    require<ConfigError>(class_contrast >= 0.0 && location_amplitude >= 0.0 &&
                             temporal_amplitude >= 0.0 && pixel_noise >= 0.0,
                         "amplitudes must be non-negative");
}

namespace {

/// Smooth random field: coarse cells-by-cells grid of N(0,1) values,
/// bilinearly upsampled to size x size, per channel.
Vec smooth_field(Index size, Index channels, Index cells, Rng& rng)
{
    Mat coarse(cells * cells, channels);
    for (Index i = 0; i < coarse.size(); ++i) coarse(i / channels, i % channels) = rng.normal();
    Vec out(size * size * channels);
    const Scalar scale = static_cast<Scalar>(cells) / static_cast<Scalar>(size);
    for (Index y = 0; y < size; ++y) {
        Scalar fy = (static_cast<Scalar>(y) + 0.5) * scale - 0.5;
        fy = std::min(std::max(fy, 0.0), static_cast<Scalar>(cells - 1));
        const Index y0 = static_cast<Index>(std::floor(fy));
        const Index y1 = std::min(y0 + 1, cells - 1);
        const Scalar wy = fy - static_cast<Scalar>(y0);
        for (Index x = 0; x < size; ++x) {
            Scalar fx = (static_cast<Scalar>(x) + 0.5) * scale - 0.5;
            fx = std::min(std::max(fx, 0.0), static_cast<Scalar>(cells - 1));
            const Index x0 = static_cast<Index>(std::floor(fx));
            const Index x1 = std::min(x0 + 1, cells - 1);
            const Scalar wx = fx - static_cast<Scalar>(x0);
            for (Index ch = 0; ch < channels; ++ch) {
                const Scalar v =
                    (1 - wy) * ((1 - wx) * coarse(y0 * cells + x0, ch) +
                                wx * coarse(y0 * cells + x1, ch)) +
                    wy * ((1 - wx) * coarse(y1 * cells + x0, ch) +
                          wx * coarse(y1 * cells + x1, ch));
                out[(y * size + x) * channels + ch] = v;
            }
        }
    }
    return out;
}

Vec transpose_image(const Vec& img, Index size, Index channels)
{
    Vec out(img.size());
    for (Index y = 0; y < size; ++y)
        for (Index x = 0; x < size; ++x)
            for (Index ch = 0; ch < channels; ++ch)
                out[(y * size + x) * channels + ch] = img[(x * size + y) * channels + ch];
    return out;
}

Vec flip_rows(const Vec& img, Index size, Index channels)
{
    Vec out(img.size());
    for (Index y = 0; y < size; ++y)
        for (Index x = 0; x < size; ++x)
            for (Index ch = 0; ch < channels; ++ch)
                out[(y * size + x) * channels + ch] =
                    img[((size - 1 - y) * size + x) * channels + ch];
    return out;
}

Vec flip_cols(const Vec& img, Index size, Index channels)
{
    Vec out(img.size());
    for (Index y = 0; y < size; ++y)
        for (Index x = 0; x < size; ++x)
            for (Index ch = 0; ch < channels; ++ch)
                out[(y * size + x) * channels + ch] =
                    img[(y * size + (size - 1 - x)) * channels + ch];
    return out;
}

/// Averages a field over the 8 flip/rotation symmetries of the square.
Vec d4_symmetrize(const Vec& img, Index size, Index channels)
{
    const Vec t = transpose_image(img, size, channels);
    Vec acc = img;
    acc += flip_rows(img, size, channels);
    acc += flip_cols(img, size, channels);
    acc += flip_cols(flip_rows(img, size, channels), size, channels);
    acc += t;
    acc += flip_rows(t, size, channels);
    acc += flip_cols(t, size, channels);
    acc += flip_cols(flip_rows(t, size, channels), size, channels);
    return acc / 8.0;
}

/// Rescales a zero-mean field to unit peak-to-peak-ish scale via std.
void standardize(Vec& v)
{
    const Scalar mean = v.mean();
    v.array() -= mean;
    const Scalar sd = std::sqrt(v.squaredNorm() / static_cast<Scalar>(v.size()));
    if (sd > 1e-12) v /= sd;
}

} // namespace

Dataset generate_synthetic(const SyntheticSpec& spec)
{
    spec.validate();
    const Index s = spec.image_size;
    const Index c = spec.channels;
    Dataset ds(s, s, c);

    std::vector<Vec> class_textures;
    for (Index cls = 0; cls < spec.num_classes; ++cls) {
        Rng rng(derive_seed(spec.seed, "class", static_cast<std::uint64_t>(cls)));
        Vec tex = smooth_field(s, c, spec.texture_cells, rng);
        tex = d4_symmetrize(tex, s, c);
        standardize(tex);
        class_textures.push_back(std::move(tex));
    }

    for (Index cls = 0; cls < spec.num_classes; ++cls) {
        for (Index loc = 0; loc < spec.locations_per_class; ++loc) {
            const std::int64_t location_id = cls * spec.locations_per_class + loc;
            Rng loc_rng(derive_seed(spec.seed, "location",
                                    static_cast<std::uint64_t>(location_id)));
            Vec loc_field = smooth_field(s, c, spec.texture_cells, loc_rng);
            standardize(loc_field);
            // Per-location color cast, one offset per channel.
            Vec cast(c);
            for (Index ch = 0; ch < c; ++ch) cast[ch] = loc_rng.normal();

            for (Index t = 0; t < spec.views_per_location; ++t) {
                Rng view_rng(derive_seed(spec.seed, "view",
                                         static_cast<std::uint64_t>(location_id),
                                         static_cast<std::uint64_t>(t)));
                Vec drift = smooth_field(s, c, spec.texture_cells, view_rng);
                standardize(drift);
                const Scalar brightness = view_rng.uniform(
                    1.0 - 0.5 * spec.temporal_amplitude, 1.0 + 0.5 * spec.temporal_amplitude);

                Sample sample;
                sample.image = Vec(s * s * c);
                for (Index p = 0; p < s * s; ++p)
                    for (Index ch = 0; ch < c; ++ch) {
                        const Index i = p * c + ch;
                        Scalar v = 0.5 +
                                   spec.class_contrast *
                                       class_textures[static_cast<std::size_t>(cls)][i] +
                                   spec.location_amplitude *
                                       (loc_field[i] + 0.5 * cast[ch]) +
                                   spec.temporal_amplitude * drift[i];
                        v = v * brightness + spec.pixel_noise * view_rng.normal();
                        sample.image[i] = std::min(1.0, std::max(0.0, v));
                    }
                sample.label = static_cast<int>(cls);
                sample.location_id = location_id;
                sample.timestamp = t;
                ds.add(std::move(sample));
            }
        }
    }
    return ds;
}

} // namespace clab::data

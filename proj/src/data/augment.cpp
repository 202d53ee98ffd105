// SPDX-License-Identifier: Apache-2.0
#include "clab/data/augment.hpp"

#include <algorithm>
#include <cmath>

namespace clab::data {

namespace {

inline Scalar px(const Vec& img, Index w, Index c, Index y, Index x, Index ch)
{
    return img[(y * w + x) * c + ch];
}

inline Scalar& px(Vec& img, Index w, Index c, Index y, Index x, Index ch)
{
    return img[(y * w + x) * c + ch];
}

inline Scalar clamp01(Scalar v) { return std::min(1.0, std::max(0.0, v)); }

} // namespace

void AugmentationPolicy::validate() const
{
    require<ConfigError>(crop_scale_min > 0.0 && crop_scale_min <= crop_scale_max &&
                             crop_scale_max <= 1.0,
                         "crop scale range must satisfy 0 < min <= max <= 1");
    require<ConfigError>(hflip_prob >= 0.0 && hflip_prob <= 1.0,
                         "hflip_prob must be a probability");
    require<ConfigError>(brightness >= 0.0 && brightness < 1.0 && contrast >= 0.0 &&
                             contrast < 1.0 && saturation >= 0.0 && saturation < 1.0,
                         "jitter strengths must be in [0, 1)");
    require<ConfigError>(blur_prob >= 0.0 && blur_prob <= 1.0,
                         "blur_prob must be a probability");
    require<ConfigError>(blur_sigma_min > 0.0 && blur_sigma_min <= blur_sigma_max,
                         "blur sigma range must satisfy 0 < min <= max");
    require<ConfigError>(out_height > 0 && out_width > 0, "output size must be positive");
    if (rotate90)
        require<ConfigError>(out_height == out_width,
                             "90-degree rotations need a square output size");
}

AugmentationPolicy AugmentationPolicy::identity(Index out_h, Index out_w)
{
    AugmentationPolicy p;
    p.crop_scale_min = 1.0;
    p.crop_scale_max = 1.0;
    p.hflip_prob = 0.0;
    p.rotate90 = false;
    p.brightness = 0.0;
    p.contrast = 0.0;
    p.saturation = 0.0;
    p.blur_prob = 0.0;
    p.out_height = out_h;
    p.out_width = out_w;
    return p;
}

Vec rotate90(const Vec& image, Index height, Index width, Index channels, int k)
{
    require<ContractViolation>(height == width, "rotate90 requires a square image");
    k = ((k % 4) + 4) % 4;
    Vec cur = image;
    for (int r = 0; r < k; ++r) {
        Vec next(cur.size());
        for (Index y = 0; y < height; ++y)
            for (Index x = 0; x < width; ++x)
                for (Index ch = 0; ch < channels; ++ch)
                    px(next, width, channels, y, x, ch) =
                        px(cur, width, channels, x, width - 1 - y, ch);
        cur = std::move(next);
    }
    return cur;
}

Vec hflip(const Vec& image, Index height, Index width, Index channels)
{
    Vec out(image.size());
    for (Index y = 0; y < height; ++y)
        for (Index x = 0; x < width; ++x)
            for (Index ch = 0; ch < channels; ++ch)
                px(out, width, channels, y, x, ch) =
                    px(image, width, channels, y, width - 1 - x, ch);
    return out;
}

Vec crop_resize(const Vec& image, Index height, Index width, Index channels, Index top,
                Index left, Index crop_h, Index crop_w, Index out_h, Index out_w)
{
    crop_h = std::max<Index>(1, crop_h);
    crop_w = std::max<Index>(1, crop_w);
    require<ContractViolation>(top >= 0 && left >= 0 && top + crop_h <= height &&
                                   left + crop_w <= width,
                               "crop window out of bounds");
    Vec out(out_h * out_w * channels);
    const Scalar sy = static_cast<Scalar>(crop_h) / static_cast<Scalar>(out_h);
    const Scalar sx = static_cast<Scalar>(crop_w) / static_cast<Scalar>(out_w);
    for (Index y = 0; y < out_h; ++y) {
        Scalar fy = (static_cast<Scalar>(y) + 0.5) * sy - 0.5;
        fy = std::min(std::max(fy, 0.0), static_cast<Scalar>(crop_h - 1));
        const Index y0 = static_cast<Index>(std::floor(fy));
        const Index y1 = std::min(y0 + 1, crop_h - 1);
        const Scalar wy = fy - static_cast<Scalar>(y0);
        for (Index x = 0; x < out_w; ++x) {
            Scalar fx = (static_cast<Scalar>(x) + 0.5) * sx - 0.5;
            fx = std::min(std::max(fx, 0.0), static_cast<Scalar>(crop_w - 1));
            const Index x0 = static_cast<Index>(std::floor(fx));
            const Index x1 = std::min(x0 + 1, crop_w - 1);
            const Scalar wx = fx - static_cast<Scalar>(x0);
            for (Index ch = 0; ch < channels; ++ch) {
                const Scalar v00 = px(image, width, channels, top + y0, left + x0, ch);
                const Scalar v01 = px(image, width, channels, top + y0, left + x1, ch);
                const Scalar v10 = px(image, width, channels, top + y1, left + x0, ch);
                const Scalar v11 = px(image, width, channels, top + y1, left + x1, ch);
                px(out, out_w, channels, y, x, ch) = (1 - wy) * ((1 - wx) * v00 + wx * v01) +
                                                     wy * ((1 - wx) * v10 + wx * v11);
            }
        }
    }
    return out;
}

Vec color_jitter(const Vec& image, Index height, Index width, Index channels,
                 Scalar brightness_factor, Scalar contrast_factor, Scalar saturation_factor)
{
    Vec out = image * brightness_factor;
    const Index n_pix = height * width;
    // Contrast pivots on the mean intensity, saturation on per-pixel gray.
    const Scalar mean = out.mean();
    out = (out.array() - mean) * contrast_factor + mean;
    if (channels == 3) {
        for (Index p = 0; p < n_pix; ++p) {
            const Scalar r = out[p * 3 + 0], g = out[p * 3 + 1], b = out[p * 3 + 2];
            const Scalar gray = 0.299 * r + 0.587 * g + 0.114 * b;
            out[p * 3 + 0] = gray + (r - gray) * saturation_factor;
            out[p * 3 + 1] = gray + (g - gray) * saturation_factor;
            out[p * 3 + 2] = gray + (b - gray) * saturation_factor;
        }
    }
    for (Index i = 0; i < out.size(); ++i) out[i] = clamp01(out[i]);
    return out;
}

Vec gaussian_blur3(const Vec& image, Index height, Index width, Index channels, Scalar sigma)
{
    require<ContractViolation>(sigma > 0.0, "blur sigma must be positive");
    Scalar k0 = 1.0;
    const Scalar k1 = std::exp(-0.5 / (sigma * sigma));
    Scalar w[3] = {k1, k0, k1};
    const Scalar norm = k0 + 2.0 * k1;
    for (Scalar& v : w) v /= norm;

    // Separable 1-3-1 pass with replicate padding, rows then columns.
    Vec tmp(image.size());
    for (Index y = 0; y < height; ++y)
        for (Index x = 0; x < width; ++x)
            for (Index ch = 0; ch < channels; ++ch) {
                const Index xm = std::max<Index>(0, x - 1);
                const Index xp = std::min(width - 1, x + 1);
                px(tmp, width, channels, y, x, ch) =
                    w[0] * px(image, width, channels, y, xm, ch) +
                    w[1] * px(image, width, channels, y, x, ch) +
                    w[2] * px(image, width, channels, y, xp, ch);
            }
    Vec out(image.size());
    for (Index y = 0; y < height; ++y)
        for (Index x = 0; x < width; ++x)
            for (Index ch = 0; ch < channels; ++ch) {
                const Index ym = std::max<Index>(0, y - 1);
                const Index yp = std::min(height - 1, y + 1);
                px(out, width, channels, y, x, ch) =
                    w[0] * px(tmp, width, channels, ym, x, ch) +
                    w[1] * px(tmp, width, channels, y, x, ch) +
                    w[2] * px(tmp, width, channels, yp, x, ch);
            }
    for (Index i = 0; i < out.size(); ++i) out[i] = clamp01(out[i]);
    return out;
}

Vec augment(const Vec& image, Index height, Index width, Index channels,
            const AugmentationPolicy& policy, Rng& rng)
{
    policy.validate();
    require<ContractViolation>(image.size() == height * width * channels,
                               "image size does not match dimensions");

    // Resized crop. The area fraction draw comes first so the rng stream has
    // a fixed layout per stage.
    const Scalar area = rng.uniform(policy.crop_scale_min, policy.crop_scale_max);
    const Scalar side = std::sqrt(area);
    Index crop_h = std::max<Index>(1, static_cast<Index>(std::lround(side * height)));
    Index crop_w = std::max<Index>(1, static_cast<Index>(std::lround(side * width)));
    crop_h = std::min(crop_h, height);
    crop_w = std::min(crop_w, width);
    const Index top = static_cast<Index>(rng.uniform_index(
        static_cast<std::size_t>(height - crop_h + 1)));
    const Index left = static_cast<Index>(rng.uniform_index(
        static_cast<std::size_t>(width - crop_w + 1)));
    Vec out = crop_resize(image, height, width, channels, top, left, crop_h, crop_w,
                          policy.out_height, policy.out_width);

    if (rng.uniform() < policy.hflip_prob)
        out = hflip(out, policy.out_height, policy.out_width, channels);

    if (policy.rotate90) {
        const int k = static_cast<int>(rng.uniform_index(4));
        if (k != 0) out = rotate90(out, policy.out_height, policy.out_width, channels, k);
    }

    if (policy.brightness > 0.0 || policy.contrast > 0.0 || policy.saturation > 0.0) {
        const Scalar fb = rng.uniform(1.0 - policy.brightness, 1.0 + policy.brightness);
        const Scalar fc = rng.uniform(1.0 - policy.contrast, 1.0 + policy.contrast);
        const Scalar fs = rng.uniform(1.0 - policy.saturation, 1.0 + policy.saturation);
        out = color_jitter(out, policy.out_height, policy.out_width, channels, fb, fc, fs);
    }

    if (policy.blur_prob > 0.0 && rng.uniform() < policy.blur_prob) {
        const Scalar sigma = rng.uniform(policy.blur_sigma_min, policy.blur_sigma_max);
        out = gaussian_blur3(out, policy.out_height, policy.out_width, channels, sigma);
    }

    for (Index i = 0; i < out.size(); ++i) out[i] = clamp01(out[i]);
    return out;
}

} // namespace clab::data

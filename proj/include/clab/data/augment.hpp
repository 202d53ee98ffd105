// SPDX-License-Identifier: Apache-2.0
#ifndef CLAB_DATA_AUGMENT_HPP
#define CLAB_DATA_AUGMENT_HPP

#include "clab/common.hpp"
#include "clab/errors.hpp"

namespace clab::data {

/// Stochastic view pipeline, applied in this fixed order:
/// resized crop -> horizontal flip -> k*90 degree rotation -> color jitter
/// -> Gaussian blur. Outputs are out_height x out_width x channels, clamped
/// to [0, 1].
struct AugmentationPolicy {
    Scalar crop_scale_min = 0.5; // area fraction of the source
    Scalar crop_scale_max = 1.0;
    Scalar hflip_prob = 0.5;
    bool rotate90 = true;
    Scalar brightness = 0.4; // multiplicative factor in [1-s, 1+s]
    Scalar contrast = 0.4;
    Scalar saturation = 0.4;
    Scalar blur_prob = 0.5;
    Scalar blur_sigma_min = 0.1;
    Scalar blur_sigma_max = 1.0;
    Index out_height = 16;
    Index out_width = 16;

    void validate() const;

    /// No-op pipeline that only resizes to the output size.
    static AugmentationPolicy identity(Index out_h, Index out_w);
};

/// Deterministic function of (image, policy, rng state).
Vec augment(const Vec& image, Index height, Index width, Index channels,
            const AugmentationPolicy& policy, Rng& rng);

//==============================================================================
// Deterministic image primitives (exposed for oracle tests)
//==============================================================================

/// 90-degree counter-clockwise rotations: out(y, x) = in(x, W-1-y), applied
/// k mod 4 times. Requires a square image.
Vec rotate90(const Vec& image, Index height, Index width, Index channels, int k);

Vec hflip(const Vec& image, Index height, Index width, Index channels);

/// Axis-aligned crop then bilinear resize to out_h x out_w.
Vec crop_resize(const Vec& image, Index height, Index width, Index channels, Index top,
                Index left, Index crop_h, Index crop_w, Index out_h, Index out_w);

/// Multiplicative brightness/contrast/saturation, clamped to [0, 1].
Vec color_jitter(const Vec& image, Index height, Index width, Index channels,
                 Scalar brightness_factor, Scalar contrast_factor, Scalar saturation_factor);

/// 3x3 Gaussian blur with replicate padding.
Vec gaussian_blur3(const Vec& image, Index height, Index width, Index channels, Scalar sigma);

} // namespace clab::data

#endif // CLAB_DATA_AUGMENT_HPP

// Copyright 2026 The dofsplat Authors
// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "dofsplat/camera.hpp"
#include "dofsplat/config.hpp"
#include "dofsplat/defocus.hpp"
#include "dofsplat/density_control.hpp"
#include "dofsplat/error.hpp"
#include "dofsplat/geo_consistency.hpp"
#include "dofsplat/global_scale.hpp"
#include "dofsplat/image.hpp"
#include "dofsplat/io/scene_io.hpp"
#include "dofsplat/kernels.hpp"
#include "dofsplat/local_scale.hpp"
#include "dofsplat/losses.hpp"
#include "dofsplat/matches.hpp"
#include "dofsplat/optics.hpp"
#include "dofsplat/splat_samples.hpp"
#include "dofsplat/turbo.hpp"
#include "dofsplat/version.hpp"

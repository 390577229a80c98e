#pragma once

#include "mgap/cli.hpp"
#include "mgap/embedding.hpp"
#include "mgap/errors.hpp"
#include "mgap/gaploss.hpp"
#include "mgap/io.hpp"
#include "mgap/linalg.hpp"
#include "mgap/manifest.hpp"
#include "mgap/mlp.hpp"
#include "mgap/parallel.hpp"
#include "mgap/project2d.hpp"
#include "mgap/rng.hpp"
#include "mgap/special.hpp"
#include "mgap/spheresim.hpp"
#include "mgap/stats.hpp"
#include "mgap/svd.hpp"
#include "mgap/svg.hpp"
#include "mgap/theory.hpp"
#include "mgap/version.hpp"

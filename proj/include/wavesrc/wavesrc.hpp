#pragma once

#include "wavesrc/types.hpp"
#include "wavesrc/bessel.hpp"
#include "wavesrc/kernels.hpp"
#include "wavesrc/core_grid.hpp"
#include "wavesrc/source.hpp"
#include "wavesrc/elastic.hpp"
#include "wavesrc/electromagnetic.hpp"
#include "wavesrc/reconstruction.hpp"
#include "wavesrc/lab.hpp"
#include "wavesrc/selftest.hpp"

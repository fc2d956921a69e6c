#pragma once

#include "qplab/admissibility.hpp"
#include "qplab/banded.hpp"
#include "qplab/checkpoint.hpp"
#include "qplab/errors.hpp"
#include "qplab/evolution.hpp"
#include "qplab/graph_geometry.hpp"
#include "qplab/grid.hpp"
#include "qplab/problems.hpp"
#include "qplab/rational.hpp"
#include "qplab/spectral.hpp"
#include "qplab/symbol_analysis.hpp"
#include "qplab/weighted_norms.hpp"

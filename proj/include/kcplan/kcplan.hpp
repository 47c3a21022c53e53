#pragma once

#include "kcplan/atlas.hpp"
#include "kcplan/collision.hpp"
#include "kcplan/experiment.hpp"
#include "kcplan/kdtree.hpp"
#include "kcplan/manifold.hpp"
#include "kcplan/planner.hpp"
#include "kcplan/problems.hpp"
#include "kcplan/sampling.hpp"
#include "kcplan/types.hpp"

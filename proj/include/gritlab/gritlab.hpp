#pragma once

#include "gritlab/core.hpp"
#include "gritlab/predicate.hpp"
#include "gritlab/event.hpp"
#include "gritlab/grid.hpp"
#include "gritlab/mdp.hpp"
#include "gritlab/value_field.hpp"
#include "gritlab/parallel.hpp"
#include "gritlab/solvers.hpp"
#include "gritlab/oracle.hpp"
#include "gritlab/diffusion.hpp"
#include "gritlab/builtin_envs.hpp"
#include "gritlab/decomposition.hpp"
#include "gritlab/causation.hpp"

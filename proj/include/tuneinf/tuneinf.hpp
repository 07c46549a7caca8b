#pragma once

#include "tuneinf/core.hpp"
#include "tuneinf/csv.hpp"
#include "tuneinf/model.hpp"
#include "tuneinf/solver.hpp"
#include "tuneinf/models.hpp"
#include "tuneinf/criteria.hpp"
#include "tuneinf/tuner.hpp"
#include "tuneinf/variance.hpp"
#include "tuneinf/harness.hpp"
#include "tuneinf/io.hpp"

// SPDX-FileCopyrightText: 2026 The bpve authors
// SPDX-License-Identifier: Apache-2.0

//! \file bpve/bpve.hpp
//! Umbrella header.

#pragma once

#include "catalogue.hpp"
#include "criteria.hpp"
#include "genfun.hpp"
#include "io.hpp"
#include "laws.hpp"
#include "param_function.hpp"
#include "rng.hpp"
#include "schedule.hpp"
#include "sim.hpp"
#include "tail.hpp"
#include "variates.hpp"

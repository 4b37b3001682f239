use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use rand::RngCore;

use treespace::classify::cv::{cross_validate, CvConfig, FixedFeatures, FoldFeatures, TreeFeatures};
use treespace::classify::elastic_net::{fit_elastic_net_with, lambda_max, FitOptions};
use treespace::classify::knn::knn_classify;
use treespace::embedding::{
    distortion_report, embed, embedded_distances, read_coordinates_csv, write_coordinates_csv, EmbeddingConfig,
    Method, Metric,
};
use treespace::frechet::{frechet_mean, frechet_mean_traced, permutation_test, subtree_variance_correlation, MeanConfig, StatisticKind};
use treespace::subtree::{extract_subtree, feature_matrix, subtree_means, FeatureMatrix, FeatureMode, SubtreeScheme};
use treespace::svg::{histogram_svg, scatter_svg};
use treespace::synthetic::{airway_template, gen_corner, gen_sheets, gen_tree_population, MetricDataset, PopulationParams};
use treespace::{distance_matrix, parse_population, parse_tree, serialize_population, serialize_tree, AttributedTree, DistanceMatrix, PopulationMember};

use crate::args::*;
use crate::run::{sibling, CliError, CliResult, Context};

pub fn dispatch(command: Command, ctx: Context) -> CliResult {
    match command {
        Command::Gen(Gen::Corner(a)) => gen_corner_cmd(a, ctx),
        Command::Gen(Gen::Sheets(a)) => gen_sheets_cmd(a, ctx),
        Command::Gen(Gen::Trees(a)) => gen_trees_cmd(a, ctx),
        Command::Dist(a) => dist_cmd(a, ctx),
        Command::Mean(a) => mean_cmd(a, ctx),
        Command::Permtest(a) => permtest_cmd(a, ctx),
        Command::SubtreeFeatures(a) => features_cmd(a, ctx),
        Command::Classify(a) => classify_cmd(a, ctx),
        Command::Knn(a) => knn_cmd(a, ctx),
        Command::Correlate(a) => correlate_cmd(a, ctx),
        Command::Embed(a) => embed_cmd(a, ctx),
        Command::Distortion(a) => distortion_cmd(a, ctx),
    }
}

fn manifest_for(output: Option<&Path>) -> Option<PathBuf> {
    output.map(|p| sibling(p, "manifest.json"))
}

fn matrix_csv(m: &DistanceMatrix) -> Vec<u8> {
    m.to_csv_string().into_bytes()
}

fn read_matrix(ctx: &mut Context, path: &Path) -> CliResult<DistanceMatrix> {
    let text = ctx.read(path)?;
    if path.extension().is_some_and(|e| e == "json") {
        return Ok(MetricDataset::from_json(&text)?.matrix);
    }
    Ok(DistanceMatrix::read_csv(text.as_bytes())?)
}

fn write_dataset(ds: &MetricDataset, out: &Path, mut ctx: Context) -> CliResult {
    ctx.write(out, (ds.to_json() + "\n").as_bytes())?;
    ctx.write(&out.with_extension("csv"), &matrix_csv(&ds.matrix))?;
    ctx.finish("gen", manifest_for(Some(out)))
}

fn gen_corner_cmd(a: GenCorner, ctx: Context) -> CliResult {
    let ds = gen_corner(a.n, ctx.seed)?;
    write_dataset(&ds, &a.output, ctx)
}

fn gen_sheets_cmd(a: GenSheets, ctx: Context) -> CliResult {
    let ds = gen_sheets(a.sheets, a.dim, a.per_sheet, ctx.seed)?;
    write_dataset(&ds, &a.output, ctx)
}

fn parse_shift(arg: &str, dim: usize) -> CliResult<(String, Vec<f64>)> {
    let (label, values) = arg
        .split_once('=')
        .ok_or_else(|| CliError::Input(format!("shift {arg:?} is not LABEL=values")))?;
    let v = values
        .split(',')
        .map(|x| x.trim().parse::<f64>().map_err(|_| CliError::Input(format!("bad shift value {x:?}"))))
        .collect::<CliResult<Vec<f64>>>()?;
    let v = if v.len() == 1 { vec![v[0]; dim] } else { v };
    if v.len() != dim {
        return Err(CliError::Input(format!("shift for {label} has {} values, expected {dim}", v.len())));
    }
    Ok((label.to_string(), v))
}

fn gen_trees_cmd(a: GenTrees, mut ctx: Context) -> CliResult {
    let template = if a.template == "airway" {
        airway_template(a.dim)?
    } else {
        let text = ctx.read(Path::new(&a.template))?;
        parse_tree(&text)?
    };
    let shifts = a
        .shift
        .iter()
        .map(|s| parse_shift(s, template.dim()))
        .collect::<CliResult<BTreeMap<_, _>>>()?;
    // Each class gets its own seed drawn from the main stream.
    let mut rng = treespace::rng::seeded(ctx.seed);
    let seeds: [u64; 2] = [rng.next_u64(), rng.next_u64()];
    let control = gen_tree_population(
        &template,
        &PopulationParams {
            n: a.n,
            topology_noise: a.topology_noise,
            attr_sigma: a.attr_sigma,
            class_shift: None,
            seed: seeds[0],
        },
    )?;
    let case = gen_tree_population(
        &template,
        &PopulationParams {
            n: a.n_case,
            topology_noise: a.topology_noise,
            attr_sigma: a.attr_sigma,
            class_shift: (!shifts.is_empty()).then_some(shifts),
            seed: seeds[1],
        },
    )?;
    let members: Vec<PopulationMember> = control
        .into_iter()
        .map(|t| ("control", t))
        .chain(case.into_iter().map(|t| ("case", t)))
        .enumerate()
        .map(|(i, (c, tree))| PopulationMember {
            id: Some(format!("s{i}")),
            class: Some(c.to_string()),
            tree,
        })
        .collect();
    ctx.write(&a.output, (serialize_population(&members) + "\n").as_bytes())?;
    ctx.finish("gen", manifest_for(Some(&a.output)))
}

struct Population {
    ids: Vec<String>,
    classes: Vec<Option<String>>,
    trees: Vec<AttributedTree>,
}

impl Population {
    fn read(ctx: &mut Context, path: &Path) -> CliResult<Population> {
        let text = ctx.read(path)?;
        let members = parse_population(&text)?;
        if members.is_empty() {
            return Err(CliError::Input(format!("{} holds no trees", path.display())));
        }
        let mut p = Population {
            ids: vec![],
            classes: vec![],
            trees: vec![],
        };
        for (i, m) in members.into_iter().enumerate() {
            p.ids.push(m.id.unwrap_or_else(|| format!("t{i}")));
            p.classes.push(m.class);
            p.trees.push(m.tree);
        }
        Ok(p)
    }

    /// Two class names in order of first appearance and a 0/1 label per tree.
    fn binary(&self) -> CliResult<([String; 2], Vec<u8>)> {
        let mut names: Vec<String> = Vec::new();
        let mut y = Vec::with_capacity(self.trees.len());
        for c in &self.classes {
            let c = c.as_ref().ok_or_else(|| CliError::Input("every tree needs a class".into()))?;
            let k = match names.iter().position(|n| n == c) {
                Some(k) => k,
                None => {
                    names.push(c.clone());
                    names.len() - 1
                }
            };
            y.push(k as u8);
        }
        if names.len() != 2 {
            return Err(CliError::Input(format!("expected exactly two classes, found {}", names.len())));
        }
        Ok(([names[0].clone(), names[1].clone()], y))
    }

    fn subtrees(&self, label: Option<&str>) -> CliResult<Vec<AttributedTree>> {
        match label {
            None => Ok(self.trees.clone()),
            Some(l) => Ok(self.trees.iter().map(|t| extract_subtree(t, l)).collect::<Result<_, _>>()?),
        }
    }
}

fn mean_config(opts: &MeanOpts, n: usize, seed: u64) -> CliResult<MeanConfig> {
    Ok(MeanConfig::new(opts.max_iterations.unwrap_or(1000 * n.max(1)), opts.tolerance, seed)?)
}

fn dist_cmd(a: Dist, mut ctx: Context) -> CliResult {
    let pop = Population::read(&mut ctx, &a.input)?;
    let labels = pop.classes.iter().all(Option::is_some).then(|| pop.classes.iter().flatten().cloned().collect());
    let m = distance_matrix(&pop.trees)?.with_ids(pop.ids.clone())?.with_labels(labels)?;
    ctx.emit(a.output.as_deref(), &matrix_csv(&m))?;
    ctx.finish("dist", manifest_for(a.output.as_deref()))
}

fn mean_cmd(a: Mean, mut ctx: Context) -> CliResult {
    let pop = Population::read(&mut ctx, &a.input)?;
    let trees: Vec<AttributedTree> = pop
        .subtrees(a.label.as_deref())?
        .into_iter()
        .zip(&pop.classes)
        .filter(|(_, c)| a.class.is_none() || c.as_ref() == a.class.as_ref())
        .map(|(t, _)| t)
        .collect();
    if trees.is_empty() {
        return Err(CliError::Input("no trees match the selection".into()));
    }
    let cfg = mean_config(&a.mean, trees.len(), ctx.seed)?;
    let result = frechet_mean_traced(&trees, &cfg)?;
    ctx.emit(a.output.as_deref(), (serialize_tree(&result.mean) + "\n").as_bytes())?;
    if let Some(out) = &a.output {
        let trace = serde_json::json!({
            "objective": result.objective,
            "iterations": result.iterations,
            "trace": result.trace,
            "n": trees.len(),
            "max_iterations": cfg.max_iterations,
            "tolerance": cfg.tolerance,
            "seed": cfg.seed,
        });
        let text = serde_json::to_string_pretty(&trace).expect("json") + "\n";
        ctx.write(&sibling(out, "trace.json"), text.as_bytes())?;
    }
    ctx.finish("mean", manifest_for(a.output.as_deref()))
}

fn permtest_cmd(a: Permtest, mut ctx: Context) -> CliResult {
    let pop = Population::read(&mut ctx, &a.groups)?;
    let (_, y) = pop.binary()?;
    let trees = pop.subtrees(a.label.as_deref())?;
    let pick = |c: u8| -> Vec<AttributedTree> {
        trees.iter().zip(&y).filter(|(_, &k)| k == c).map(|(t, _)| t.clone()).collect()
    };
    let (g1, g2) = (pick(0), pick(1));
    let cfg = mean_config(&a.mean, g1.len().max(g2.len()), ctx.seed)?;
    let kind = match a.statistic {
        Statistic::Mean => StatisticKind::Mean,
        Statistic::Variance => StatisticKind::Variance,
    };
    let report = permutation_test(&g1, &g2, kind, a.permutations, ctx.seed, &cfg)?;
    ctx.emit(a.output.as_deref(), (report.to_json(a.include_permuted) + "\n").as_bytes())?;
    ctx.finish("permtest", manifest_for(a.output.as_deref()))
}

fn scheme_of(labels: &Option<Vec<String>>) -> CliResult<SubtreeScheme> {
    match labels {
        None => Ok(SubtreeScheme::default()),
        Some(l) => Ok(SubtreeScheme::new(l.clone())?),
    }
}

fn mode_of(m: Mode) -> FeatureMode {
    match m {
        Mode::Pooled => FeatureMode::Pooled,
        Mode::TwoClass => FeatureMode::TwoClass,
    }
}

fn features_cmd(a: SubtreeFeatures, mut ctx: Context) -> CliResult {
    let pop = Population::read(&mut ctx, &a.input)?;
    let scheme = scheme_of(&a.features.scheme)?;
    let mode = mode_of(a.features.mode);
    let (classes, y) = match (mode, pop.binary()) {
        (_, Ok(b)) => b,
        (FeatureMode::Pooled, Err(_)) => {
            let first = pop.classes.first().cloned().flatten().unwrap_or_default();
            ([first, String::new()], vec![0; pop.trees.len()])
        }
        (FeatureMode::TwoClass, Err(e)) => return Err(e),
    };
    let cfg = mean_config(&a.mean, pop.trees.len(), ctx.seed)?;
    let means = subtree_means(&pop.trees, &y, &scheme, mode, &cfg)?;
    let fm = feature_matrix(pop.ids.clone(), &pop.trees, y, classes, &scheme, mode, &means)?;
    let mut buf = Vec::new();
    fm.write_csv(&mut buf)?;
    ctx.emit(a.output.as_deref(), &buf)?;
    ctx.finish("subtree-features", manifest_for(a.output.as_deref()))
}

fn classify_cmd(a: Classify, mut ctx: Context) -> CliResult {
    let cfg = CvConfig {
        folds: a.folds,
        repeats: a.repeats,
        alphas: a.alphas.clone(),
        n_lambda: a.n_lambda,
        lambda_min_ratio: a.lambda_min_ratio,
        seed: ctx.seed,
        fit: FitOptions {
            standardize: !a.no_standardize,
            ..FitOptions::default()
        },
    };
    // Full-data features for the final models, plus the fold-aware source.
    let (report, full) = if let Some(path) = &a.features {
        let text = ctx.read(path)?;
        let fm = FeatureMatrix::read_csv(text.as_bytes())?;
        let report = cross_validate(&FixedFeatures::from(&fm), &cfg)?;
        (report, fm)
    } else {
        let path = a.input.as_ref().expect("clap requires one input");
        let pop = Population::read(&mut ctx, path)?;
        let (classes, y) = pop.binary()?;
        let scheme = scheme_of(&a.feature_opts.scheme)?;
        let mode = mode_of(a.feature_opts.mode);
        let mcfg = mean_config(&a.mean, pop.trees.len(), ctx.seed)?;
        let tf = TreeFeatures {
            trees: &pop.trees,
            y: &y,
            classes: classes.clone(),
            scheme: scheme.clone(),
            mode,
            mean_config: mcfg,
        };
        let report = cross_validate(&tf as &dyn FoldFeatures, &cfg)?;
        let means = subtree_means(&pop.trees, &y, &scheme, mode, &mcfg)?;
        let fm = feature_matrix(pop.ids.clone(), &pop.trees, y, classes, &scheme, mode, &means)?;
        (report, fm)
    };
    ctx.emit(a.output.as_deref(), (report.to_json() + "\n").as_bytes())?;
    if let Some(out) = &a.output {
        let names = full.column_names();
        let mut models = Vec::new();
        for ar in &report.alphas {
            let lmax = lambda_max(&full.rows, &full.y, ar.alpha, cfg.fit.standardize)?;
            let m = fit_elastic_net_with(&full.rows, &full.y, ar.chosen_ratio * lmax, ar.alpha, &cfg.fit, None)?;
            let doc: serde_json::Value = serde_json::from_str(&m.to_json(&names)).expect("model json");
            models.push(doc);
        }
        let text = serde_json::to_string_pretty(&models).expect("json") + "\n";
        ctx.write(&sibling(out, "models.json"), text.as_bytes())?;
    }
    ctx.finish("classify", manifest_for(a.output.as_deref()))
}

fn knn_cmd(a: Knn, mut ctx: Context) -> CliResult {
    let m = read_matrix(&mut ctx, &a.input)?;
    let labels = m
        .labels()
        .ok_or_else(|| CliError::Input("the matrix needs a label column".into()))?
        .to_vec();
    let report = knn_classify(&m, &labels, a.k, a.folds, ctx.seed)?;
    ctx.emit(a.output.as_deref(), (report.to_json() + "\n").as_bytes())?;
    ctx.finish("knn", manifest_for(a.output.as_deref()))
}

fn correlate_cmd(a: Correlate, mut ctx: Context) -> CliResult {
    let pop = Population::read(&mut ctx, &a.input)?;
    let scheme = scheme_of(&a.scheme)?;
    let cfg = mean_config(&a.mean, pop.trees.len(), ctx.seed)?;
    let mut populations = BTreeMap::new();
    let mut means = BTreeMap::new();
    for label in scheme.labels() {
        let subs = pop.subtrees(Some(label))?;
        means.insert(label.clone(), frechet_mean(&subs, &cfg)?);
        populations.insert(label.clone(), subs);
    }
    let report = subtree_variance_correlation(&populations, &means, a.bins)?;
    let doc = serde_json::json!({
        "labels": report.labels,
        "ids": pop.ids,
        "r": report.r,
        "deviations": report.deviations,
        "histograms": report.histograms,
    });
    let text = serde_json::to_string_pretty(&doc).expect("json") + "\n";
    ctx.emit(a.output.as_deref(), text.as_bytes())?;
    if let Some(dir) = &a.svg_dir {
        let note = ctx.svg_note();
        for (label, h) in report.labels.iter().zip(&report.histograms) {
            let svg = histogram_svg(h, &format!("{label} deviation from mean"), "geodesic distance", note.as_deref());
            ctx.write(&dir.join(format!("deviation_{label}.svg")), svg.as_bytes())?;
        }
    }
    ctx.finish("correlate", manifest_for(a.output.as_deref()))
}

fn embed_cmd(a: Embed, mut ctx: Context) -> CliResult {
    let target = read_matrix(&mut ctx, &a.input)?;
    let method = match a.method {
        EmbedMethod::Mds => Method::Mds,
        EmbedMethod::Isomap => Method::Isomap,
        EmbedMethod::Hmds => Method::Hmds,
        EmbedMethod::Hisomap => Method::Hisomap,
    };
    let cfg = EmbeddingConfig {
        method,
        isomap_k: a.k,
        max_iterations: a.max_iterations,
        stress_tolerance: a.tolerance,
        restarts: a.restarts,
        seed: ctx.seed,
        histogram_bins: a.bins,
    };
    let r = embed(&target, &cfg)?;
    let dir = &a.output;
    let mut buf = Vec::new();
    write_coordinates_csv(&mut buf, target.ids(), target.labels(), &r.coordinates)?;
    ctx.write(&dir.join("coordinates.csv"), &buf)?;
    ctx.write(&dir.join("distortion.json"), (r.distortion.to_json() + "\n").as_bytes())?;
    ctx.write(&dir.join("embedding.json"), (r.to_json(target.ids()) + "\n").as_bytes())?;
    let note = ctx.svg_note();
    let labels: Vec<String> = target.labels().map_or_else(|| vec![String::new(); target.len()], <[String]>::to_vec);
    let disk = r.metric == Metric::Hyperbolic;
    let scatter = scatter_svg(&r.coordinates, &labels, disk, &format!("{} embedding", method.name()), note.as_deref());
    ctx.write(&dir.join("scatter.svg"), scatter.as_bytes())?;
    let hist = histogram_svg(
        &r.distortion.additive_histogram,
        &format!("{} additive error", method.name()),
        "embedded - original distance",
        note.as_deref(),
    );
    ctx.write(&dir.join("histogram.svg"), hist.as_bytes())?;
    ctx.finish("embed", Some(dir.join("manifest.json")))
}

fn distortion_cmd(a: Distortion, mut ctx: Context) -> CliResult {
    let original = read_matrix(&mut ctx, &a.original)?;
    let embedded = if let Some(p) = &a.embedded {
        read_matrix(&mut ctx, p)?
    } else {
        let path = a.coords.as_ref().expect("clap requires one embedding");
        let text = ctx.read(path)?;
        let (ids, _, coords) = read_coordinates_csv(text.as_bytes())?;
        if ids != original.ids() {
            return Err(CliError::Input("coordinate ids differ from the matrix ids".into()));
        }
        let metric = match a.metric {
            MetricArg::Euclidean => Metric::Euclidean,
            MetricArg::Hyperbolic => Metric::Hyperbolic,
        };
        if metric == Metric::Hyperbolic && coords.iter().any(|c| c[0] * c[0] + c[1] * c[1] >= 1.0) {
            return Err(CliError::Input("hyperbolic coordinates must lie inside the unit disk".into()));
        }
        embedded_distances(&original, &coords, metric)?
    };
    let report = distortion_report(&original, &embedded, a.bins)?;
    ctx.emit(a.output.as_deref(), (report.to_json() + "\n").as_bytes())?;
    if let Some(svg) = &a.svg {
        let note = ctx.svg_note();
        let h = histogram_svg(&report.additive_histogram, "additive error", "embedded - original distance", note.as_deref());
        ctx.write(svg, h.as_bytes())?;
    }
    ctx.finish("distortion", manifest_for(a.output.as_deref()))
}

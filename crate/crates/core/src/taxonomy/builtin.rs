//! The shipped option-pricing taxonomy and its prompt templates.
//!
//! Template text is kept byte-identical to the golden files under
//! `prompts/`; the `golden_prompts` integration test enforces this.

use std::collections::BTreeMap;

use super::prompt::{LabelLevel, OutputGrammar, PromptSpec};
use super::{Category, Dimension, Taxonomy};

const NOT_SPECIFIED: &str = "Not Specified";

const DIM4_CLASSES: [(&str, &str); 8] = [
    ("1", "Analytical Models"),
    ("2", "Numerical Methods"),
    ("3", "Multi-Factor and Hybrid Models"),
    ("4", "Market Imperfections and Frictions"),
    ("5", "Calibration and Model Estimation"),
    ("6", "Machine Learning and Data-Driven Approaches"),
    ("7", "Behavioral and Alternative Paradigms"),
    ("8", "Emerging and Niche Approaches or Others"),
];

pub fn builtin_taxonomy() -> Taxonomy {
    let mut dim1 = Dimension::binary(1, "Option Pricing Models");
    dim1.gate = true;

    let dim2 = Dimension::multi_label(
        2,
        "Underlying Asset Types",
        [
            "Stocks",
            "Indexes",
            "Commodities",
            "Currencies",
            "Interest Rates",
            "Cryptocurrencies",
            NOT_SPECIFIED,
        ],
    )
    .with_default(NOT_SPECIFIED);

    let dim3 = Dimension::multi_label(
        3,
        "Option Types",
        ["European", "American", "Exotic", NOT_SPECIFIED],
    )
    .with_default(NOT_SPECIFIED);

    let mut dim4 = Dimension::multi_label(4, "Option Model Types", DIM4_CLASSES.map(|(id, _)| id));
    for (cat, (_, name)) in dim4.categories.iter_mut().zip(DIM4_CLASSES) {
        cat.display_name = name.to_owned();
    }
    dim4.subclasses = DIM4_SUBCLASSES
        .iter()
        .map(|(id, name)| Category::new(*id, *name))
        .collect();
    dim4.subclass_map = Some(
        DIM4_SUBCLASSES
            .iter()
            .map(|(id, _)| {
                let class = id.split('.').next().expect("dotted index");
                ((*id).to_owned(), class.to_owned())
            })
            .collect::<BTreeMap<_, _>>(),
    );

    Taxonomy {
        dimensions: vec![dim1, dim2, dim3, dim4],
    }
}

fn spec(
    prompt_id: &str,
    dim_id: u32,
    level: LabelLevel,
    task: &str,
    grammar: OutputGrammar,
) -> PromptSpec {
    PromptSpec {
        prompt_id: prompt_id.to_owned(),
        dim_id,
        level,
        template_text: format!("{task}\n\n{{ABSTRACT}}"),
        constraints: Vec::new(),
        output_grammar: grammar,
    }
}

/// Prompt specs for every shipped dimension; Dim 4 has both a class-level
/// and a subclass-level variant.
pub fn builtin_prompts() -> Vec<PromptSpec> {
    let dim1 = PromptSpec {
        prompt_id: "dim1".into(),
        dim_id: 1,
        level: LabelLevel::Class,
        template_text: format!("{DIM1_PREAMBLE}\n{{CONSTRAINTS}}\n\n{{ABSTRACT}}"),
        constraints: DIM1_CONSTRAINTS.iter().map(|c| (*c).to_owned()).collect(),
        output_grammar: OutputGrammar::YesNo,
    };
    vec![
        dim1,
        spec("dim2", 2, LabelLevel::Class, DIM2_TASK, OutputGrammar::KeyedYesNoDict),
        spec("dim3", 3, LabelLevel::Class, DIM3_TASK, OutputGrammar::KeyedYesNoDict),
        spec(
            "dim4_class",
            4,
            LabelLevel::Class,
            DIM4_CLASS_TASK,
            OutputGrammar::BracketedIndexList,
        ),
        spec(
            "dim4_subclass",
            4,
            LabelLevel::Subclass,
            DIM4_SUBCLASS_TASK,
            OutputGrammar::BracketedIndexList,
        ),
    ]
}

pub fn builtin_prompt(prompt_id: &str) -> Option<PromptSpec> {
    builtin_prompts().into_iter().find(|p| p.prompt_id == prompt_id)
}

const DIM1_PREAMBLE: &str = "Please clarify whether the abstract discusses developing or comparing pricing models or volatility models. I need a response that uses only the options listed below: [Yes, No]. What is your answer? Your answer should consist solely of the item from the list and nothing else. Your answer should also follow the constraints below:";

const DIM1_CONSTRAINTS: [&str; 23] = [
    "You should answer No if the abstract primarily focuses on the application of option pricing, rather than the development or comparison of option pricing models themselves.",
    "You should answer Yes if the abstract focuses on methods of solving the existing option pricing or volatility model.",
    "You should answer No if the abstract is about real estate investment or real option.",
    "You should answer No if the abstract is purely about volatility and does not mention option pricing at all.",
    "You should answer No if the abstract is purely about Greeks and risk management and does not mention option pricing at all.",
    "You should answer No if the abstract is purely about hedging strategies and does not mention option pricing models at all.",
    "You should answer No if the abstract describes a application of option pricing principles to a non traditional financial market.",
    "You should answer No if the abstract is purely an empirical study testing the performance of existing, well-established option pricing models, without proposing any modifications or new solution methods.",
    "You should answer No if the abstract focuses on market microstructure related to options, such as bid-ask spreads or trading volume, without discussing model development.",
    "You should answer No if the abstract applies option pricing theory to model or predict bankruptcy or credit risk, without developing or comparing new option pricing models or solution methods.",
    "You should answer No if the abstract primarily focuses on comparing or developing volatility models without a direct focus on option pricing models or their solution methods.",
    "You should answer Yes if the abstract focuses on comparing different option pricing models, even if it involves an empirical study.",
    "You should answer No if the provided text is a list of diverse paper topics from a proceedings or collection, rather than a single abstract focused on developing or comparing pricing/volatility models.",
    "You should answer No if the abstract focuses on developing or comparing estimation methods for implied volatility surfaces, without directly developing or comparing option pricing models.",
    "You should answer No if the abstract focuses on developing or analyzing numerical methods for solving PDE used in option pricing, without directly developing or comparing option pricing models.",
    "You should answer No if the abstract applies option pricing theory to model or analyze insurance products, without developing or comparing new option pricing models or solution methods.",
    "You should answer No if the abstract applies option pricing theory to model or analyze real options or investment opportunities, without developing or comparing new option pricing models or solution methods.",
    "You should answer No if the abstract talks about cash-settled American-style options",
    "You should answer No if the abstract talks about energy markets",
    "You should answer No if the abstract talks about weather derivatives",
    "You should answer No if the abstract talks about employee stock options",
    "You should answer No if the abstract talks about vulnerable chained options",
    "You should answer No if the abstract contains the phrase 'The proceedings contain'",
];

const DIM2_TASK: &str = concat!(
    "Task: Classify Underlying Asset Type. Classify the underlying asset type of options mentioned in the abstract. We have six questions for you to answer. For each question, please respond with only 'yes' or 'no' and nothing else.\n",
    "Q1: Does this abstract specify Stocks as underlying assets?\n",
    "Q2: Does this abstract specify Indexes as underlying assets?\n",
    "Q3: Does this abstract specify Commodities as underlying assets?\n",
    "Q4: Does this abstract specify Currencies as underlying assets?\n",
    "Q5: Does this abstract specify Interest Rates as underlying assets?\n",
    "Q6: Does this abstract specify Cryptocurrencies as underlying assets?\n",
    "Please merge your responses to the final output as the following format {Stocks: your response for Q1, Indexes: your response for Q2, Commodities: your response for Q3, Currencies: your response for Q4, Interest Rates: your response for Q5, Cryptocurrencies: your response for Q6}.",
);

const DIM3_TASK: &str = concat!(
    "Task: Classify Option Type. Classify the type of options studied in the abstract. We have three questions for you to answer. For each question, please respond with only 'yes' or 'no' and nothing else.\n",
    "Q1: Does this abstract study European options?\n",
    "Q2: Does this abstract study American options?\n",
    "Q3: Does this abstract study Exotic options, including Asian, Barrier or Basket options?\n",
    "Please merge your responses to the final output as the following format {European: your response for Q1, American: your response for Q2, Exotic: your response for Q3}.",
);

const DIM4_CLASS_TASK: &str = concat!(
    "Class-Level Task: Classify this abstract of an academic paper into the option pricing methodology taxonomy. Please only assign up to all applicable class from the taxonomy. Use the exact subclass index 1-8 provided below and give me just a list in form of [class_index; class_index].\n",
    "Taxonomy_index and Toxonomy name:\n",
    "1\tAnalytical Models\n",
    "2\tNumerical Methods\n",
    "3\tMulti-Factor and Hybrid Models\n",
    "4\tMarket Imperfections and Frictions\n",
    "5\tCalibration and Model Estimation\n",
    "6\tMachine Learning and Data-Driven Approaches\n",
    "7\tBehavioral and Alternative Paradigms\n",
    "8\tEmerging and Niche Approaches or Others(cannot find in the previous class)",
);

const DIM4_SUBCLASS_TASK: &str = concat!(
    "Subclass-Level Task: Classify this abstract of an academic paper into the option pricing methodology taxonomy. Please only assign up to all applicable subclass from the taxonomy. Use the exact subclass index [1.1, ...,8.3] provided below and give me just a list in form of [subclass_index; subclass_index]. The taxonomy index and toxonomy are as followings:\n",
    "1.1\tAnalytical Models: Black-Scholes Extensions\n",
    "1.2\tAnalytical Models: Stochastic Volatility Models\n",
    "1.3\tAnalytical Models: Jump/Discontinuity Models\n",
    "1.4\tAnalytical Models: Regime-Switching Models\n",
    "1.5\tOther Analytical Models\n",
    "2.1\tNumerical Methods: PDE/PIDE Solvers\n",
    "2.2\tNumerical Methods: Monte Carlo Simulation\n",
    "2.3\tNumerical Methods: Lattice/Tree Methods\n",
    "2.4\tNumerical Methods: Transform Methods\n",
    "2.5\tOther Numerical Methods\n",
    "3.1\tMulti-Factor and Hybrid Models: Stochastic interest rates/term structure of interest rates\n",
    "3.2\tMulti-Factor and Hybrid Models: Stochastic dividends\n",
    "3.3\tMulti-Factor and Hybrid Models: Multi-asset correlation\n",
    "3.4\tMulti-Factor and Hybrid Models: Hybrid local-stochastic volatility\n",
    "3.5\tOther Multi-Factor and Hybrid Models\n",
    "4.1\tMarket Imperfections and Frictions: Transaction costs\n",
    "4.2\tMarket Imperfections and Frictions: Illiquidity/funding costs\n",
    "4.3\tMarket Imperfections and Frictions: Taxes/regulation\n",
    "4.4\tOther Market Imperfections\n",
    "5.1\tCalibration and Model Estimation: Implied volatility fitting\n",
    "5.2\tCalibration and Model Estimation: Density recovery\n",
    "5.3\tCalibration and Model Estimation: Statistical calibration\n",
    "5.4\tOther Calibration and Model Estimation\n",
    "6.1\tMachine Learning and Data-Driven Approaches: Neural PDE solvers/Deep learning for pricing prediction\n",
    "6.2\tMachine Learning and Data-Driven Approaches: Reinforcement Learning for optimal exercise\n",
    "6.3\tMachine Learning and Data-Driven Approaches: ML for calibration\n",
    "6.4\tOther Machine Learning and Data-Driven Approaches\n",
    "7.1\tBehavioral and Alternative Paradigms: Utility-based pricing\n",
    "7.2\tBehavioral and Alternative Paradigms: Behavioral biases\n",
    "7.3\tBehavioral and Alternative Paradigms: Ambiguity aversion\n",
    "7.4\tOther Behavioral and Alternative Paradigms\n",
    "8.1\tEmerging and Niche Approaches: Quantum computing\n",
    "8.2\tEmerging and Niche Approaches: ESG-adjusted models\n",
    "8.3\tOthers (cannot find in the previous class)",
);

const DIM4_SUBCLASSES: [(&str, &str); 34] = [
    ("1.1", "Analytical Models: Black-Scholes Extensions"),
    ("1.2", "Analytical Models: Stochastic Volatility Models"),
    ("1.3", "Analytical Models: Jump/Discontinuity Models"),
    ("1.4", "Analytical Models: Regime-Switching Models"),
    ("1.5", "Other Analytical Models"),
    ("2.1", "Numerical Methods: PDE/PIDE Solvers"),
    ("2.2", "Numerical Methods: Monte Carlo Simulation"),
    ("2.3", "Numerical Methods: Lattice/Tree Methods"),
    ("2.4", "Numerical Methods: Transform Methods"),
    ("2.5", "Other Numerical Methods"),
    ("3.1", "Multi-Factor and Hybrid Models: Stochastic interest rates/term structure of interest rates"),
    ("3.2", "Multi-Factor and Hybrid Models: Stochastic dividends"),
    ("3.3", "Multi-Factor and Hybrid Models: Multi-asset correlation"),
    ("3.4", "Multi-Factor and Hybrid Models: Hybrid local-stochastic volatility"),
    ("3.5", "Other Multi-Factor and Hybrid Models"),
    ("4.1", "Market Imperfections and Frictions: Transaction costs"),
    ("4.2", "Market Imperfections and Frictions: Illiquidity/funding costs"),
    ("4.3", "Market Imperfections and Frictions: Taxes/regulation"),
    ("4.4", "Other Market Imperfections"),
    ("5.1", "Calibration and Model Estimation: Implied volatility fitting"),
    ("5.2", "Calibration and Model Estimation: Density recovery"),
    ("5.3", "Calibration and Model Estimation: Statistical calibration"),
    ("5.4", "Other Calibration and Model Estimation"),
    ("6.1", "Machine Learning and Data-Driven Approaches: Neural PDE solvers/Deep learning for pricing prediction"),
    ("6.2", "Machine Learning and Data-Driven Approaches: Reinforcement Learning for optimal exercise"),
    ("6.3", "Machine Learning and Data-Driven Approaches: ML for calibration"),
    ("6.4", "Other Machine Learning and Data-Driven Approaches"),
    ("7.1", "Behavioral and Alternative Paradigms: Utility-based pricing"),
    ("7.2", "Behavioral and Alternative Paradigms: Behavioral biases"),
    ("7.3", "Behavioral and Alternative Paradigms: Ambiguity aversion"),
    ("7.4", "Other Behavioral and Alternative Paradigms"),
    ("8.1", "Emerging and Niche Approaches: Quantum computing"),
    ("8.2", "Emerging and Niche Approaches: ESG-adjusted models"),
    ("8.3", "Others (cannot find in the previous class)"),
];

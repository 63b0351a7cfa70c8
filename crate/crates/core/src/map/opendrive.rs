use roxmltree::{Document, Node};
use tracing::warn;

use super::model::{
    Contact, ElementType, Junction, JunctionConnection, LaneSection, MapLane, MapModel, MapRoad,
    Poly3, RoadLink,
};
use super::MapError;
use crate::geometry::{RefLineSegment, SegmentKind};

fn attr<'a>(n: Node<'a, '_>, name: &str) -> Result<&'a str, MapError> {
    n.attribute(name).ok_or_else(|| MapError::Invalid {
        line: line_of(n),
        message: format!("<{}> lacks attribute `{name}`", n.tag_name().name()),
    })
}

fn num(n: Node<'_, '_>, name: &str) -> Result<f64, MapError> {
    let raw = attr(n, name)?;
    raw.trim().parse::<f64>().ok().filter(|v| v.is_finite()).ok_or_else(|| MapError::Invalid {
        line: line_of(n),
        message: format!("attribute `{name}` is not a number: `{raw}`"),
    })
}

fn num_or(n: Node<'_, '_>, name: &str, default: f64) -> Result<f64, MapError> {
    if n.attribute(name).is_some() {
        num(n, name)
    } else {
        Ok(default)
    }
}

fn int(n: Node<'_, '_>, name: &str) -> Result<i32, MapError> {
    let raw = attr(n, name)?;
    raw.trim().parse::<i32>().map_err(|_| MapError::Invalid {
        line: line_of(n),
        message: format!("attribute `{name}` is not an integer: `{raw}`"),
    })
}

fn line_of(n: Node<'_, '_>) -> u32 {
    n.document().text_pos_at(n.range().start).row
}

fn children<'a, 'i>(n: Node<'a, 'i>, tag: &'a str) -> impl Iterator<Item = Node<'a, 'i>> + 'a {
    n.children().filter(move |c| c.is_element() && c.tag_name().name() == tag)
}

fn child<'a, 'i>(n: Node<'a, 'i>, tag: &'a str) -> Option<Node<'a, 'i>> {
    children(n, tag).next()
}

fn poly(n: Node<'_, '_>, start_attr: &str) -> Result<Poly3, MapError> {
    Ok(Poly3 {
        start: num(n, start_attr)?,
        a: num_or(n, "a", 0.0)?,
        b: num_or(n, "b", 0.0)?,
        c: num_or(n, "c", 0.0)?,
        d: num_or(n, "d", 0.0)?,
    })
}

fn contact(n: Node<'_, '_>, name: &str) -> Result<Option<Contact>, MapError> {
    match n.attribute(name) {
        None => Ok(None),
        Some("start") => Ok(Some(Contact::Start)),
        Some("end") => Ok(Some(Contact::End)),
        Some(other) => Err(MapError::Invalid {
            line: line_of(n),
            message: format!("unknown contact point `{other}`"),
        }),
    }
}

fn road_link(n: Node<'_, '_>) -> Result<RoadLink, MapError> {
    let element_type = match attr(n, "elementType")? {
        "road" => ElementType::Road,
        "junction" => ElementType::Junction,
        other => {
            return Err(MapError::Invalid { line: line_of(n), message: format!("unknown elementType `{other}`") })
        }
    };
    Ok(RoadLink { element_type, element_id: attr(n, "elementId")?.to_string(), contact: contact(n, "contactPoint")? })
}

fn geometry(g: Node<'_, '_>, road: &str) -> Result<RefLineSegment, MapError> {
    let kind_node = g.children().find(|c| c.is_element()).ok_or_else(|| MapError::Invalid {
        line: line_of(g),
        message: "<geometry> without a shape element".into(),
    })?;
    let kind = match kind_node.tag_name().name() {
        "line" => SegmentKind::Line,
        "arc" => SegmentKind::Arc { curvature: num(kind_node, "curvature")? },
        other => {
            return Err(MapError::Unsupported { what: format!("geometry `{other}`"), road: road.to_string() })
        }
    };
    RefLineSegment::new(kind, num(g, "s")?, num(g, "x")?, num(g, "y")?, num(g, "hdg")?, num(g, "length")?)
        .map_err(|e| MapError::Invalid { line: line_of(g), message: e.to_string() })
}

fn lane(n: Node<'_, '_>) -> Result<MapLane, MapError> {
    let link = child(n, "link");
    let linked = |tag| -> Result<Option<i32>, MapError> {
        link.and_then(|l| child(l, tag)).map(|p| int(p, "id")).transpose()
    };
    let mut widths = children(n, "width").map(|w| poly(w, "sOffset")).collect::<Result<Vec<_>, _>>()?;
    widths.sort_by(|a, b| a.start.total_cmp(&b.start));
    if children(n, "border").next().is_some() {
        return Err(MapError::Unsupported { what: "lane <border> records".into(), road: String::new() });
    }
    Ok(MapLane {
        id: int(n, "id")?,
        kind: n.attribute("type").unwrap_or("driving").to_string(),
        widths,
        predecessor: linked("predecessor")?,
        successor: linked("successor")?,
    })
}

fn road(n: Node<'_, '_>) -> Result<MapRoad, MapError> {
    let id = attr(n, "id")?.to_string();
    let junction = n.attribute("junction").filter(|j| *j != "-1").map(str::to_string);
    let left_hand = match n.attribute("rule") {
        None | Some("RHT") => false,
        Some("LHT") => true,
        Some(other) => {
            return Err(MapError::Invalid { line: line_of(n), message: format!("unknown traffic rule `{other}`") })
        }
    };
    let link = child(n, "link");
    let predecessor = link.and_then(|l| child(l, "predecessor")).map(road_link).transpose()?;
    let successor = link.and_then(|l| child(l, "successor")).map(road_link).transpose()?;

    let plan = child(n, "planView")
        .ok_or_else(|| MapError::Invalid { line: line_of(n), message: format!("road {id} has no <planView>") })?;
    let mut plan_view = children(plan, "geometry").map(|g| geometry(g, &id)).collect::<Result<Vec<_>, _>>()?;
    if plan_view.is_empty() {
        return Err(MapError::Invalid { line: line_of(plan), message: format!("road {id} has no geometry") });
    }
    plan_view.sort_by(|a, b| a.s0.total_cmp(&b.s0));

    for ignored in ["elevationProfile", "lateralProfile"] {
        if child(n, ignored).is_some_and(|e| e.children().any(|c| c.is_element())) {
            warn!(road = %id, element = ignored, "ignoring elevation data");
        }
    }

    let lanes = child(n, "lanes")
        .ok_or_else(|| MapError::Invalid { line: line_of(n), message: format!("road {id} has no <lanes>") })?;
    let mut lane_offsets = children(lanes, "laneOffset").map(|o| poly(o, "s")).collect::<Result<Vec<_>, _>>()?;
    lane_offsets.sort_by(|a, b| a.start.total_cmp(&b.start));
    let mut sections = Vec::new();
    for sec in children(lanes, "laneSection") {
        let mut ls = Vec::new();
        for side in ["left", "right"] {
            if let Some(side_node) = child(sec, side) {
                for l in children(side_node, "lane") {
                    let mut parsed = lane(l).map_err(|e| match e {
                        MapError::Unsupported { what, .. } => MapError::Unsupported { what, road: id.clone() },
                        other => other,
                    })?;
                    if (side == "left") != (parsed.id > 0) {
                        return Err(MapError::Invalid {
                            line: line_of(l),
                            message: format!("lane {} on the {side} side", parsed.id),
                        });
                    }
                    if parsed.widths.is_empty() {
                        parsed.widths.push(Poly3::constant(0.0, 0.0));
                    }
                    ls.push(parsed);
                }
            }
        }
        ls.sort_by_key(|l| l.id);
        if ls.windows(2).any(|w| w[0].id == w[1].id) {
            return Err(MapError::Invalid { line: line_of(sec), message: format!("duplicate lane id in road {id}") });
        }
        sections.push(LaneSection { s: num(sec, "s")?, lanes: ls });
    }
    if sections.is_empty() {
        return Err(MapError::Invalid { line: line_of(lanes), message: format!("road {id} has no lane section") });
    }
    sections.sort_by(|a, b| a.s.total_cmp(&b.s));
    let length = num(n, "length")?;
    if !(length > 0.0) {
        return Err(MapError::Invalid { line: line_of(n), message: format!("road {id} has non-positive length") });
    }
    Ok(MapRoad { id, length, junction, left_hand, plan_view, lane_offsets, sections, predecessor, successor })
}

fn junction(n: Node<'_, '_>) -> Result<Junction, MapError> {
    let mut connections = Vec::new();
    for c in children(n, "connection") {
        let lane_links = children(c, "laneLink")
            .map(|l| Ok((int(l, "from")?, int(l, "to")?)))
            .collect::<Result<Vec<_>, MapError>>()?;
        connections.push(JunctionConnection {
            id: attr(c, "id")?.to_string(),
            incoming_road: attr(c, "incomingRoad")?.to_string(),
            connecting_road: attr(c, "connectingRoad")?.to_string(),
            contact: contact(c, "contactPoint")?.unwrap_or(Contact::Start),
            lane_links,
        });
    }
    Ok(Junction { id: attr(n, "id")?.to_string(), connections })
}

/// Parses the supported OpenDRIVE subset.
pub fn parse_opendrive(text: &str) -> Result<MapModel, MapError> {
    let doc = Document::parse(text).map_err(|e| MapError::Xml(e.to_string()))?;
    let root = doc.root_element();
    if root.tag_name().name() != "OpenDRIVE" {
        return Err(MapError::Xml(format!("root element is <{}>, expected <OpenDRIVE>", root.tag_name().name())));
    }
    let mut model = MapModel::default();
    for r in children(root, "road") {
        model.roads.push(road(r)?);
    }
    for j in children(root, "junction") {
        model.junctions.push(junction(j)?);
    }
    check_links(&model)?;
    Ok(model)
}

fn check_links(m: &MapModel) -> Result<(), MapError> {
    let mut ids = std::collections::BTreeSet::new();
    for r in &m.roads {
        if !ids.insert(r.id.as_str()) {
            return Err(MapError::Invalid { line: 0, message: format!("duplicate road id {}", r.id) });
        }
    }
    let dangling = |what: String| Err(MapError::DanglingLink(what));
    for r in &m.roads {
        for link in [&r.predecessor, &r.successor].into_iter().flatten() {
            let exists = match link.element_type {
                ElementType::Road => m.road(&link.element_id).is_some(),
                ElementType::Junction => m.junctions.iter().any(|j| j.id == link.element_id),
            };
            if !exists {
                return dangling(format!("road {} links to missing {}", r.id, link.element_id));
            }
        }
        if let Some(j) = &r.junction {
            if !m.junctions.iter().any(|x| &x.id == j) {
                return dangling(format!("road {} belongs to missing junction {j}", r.id));
            }
        }
    }
    for j in &m.junctions {
        for c in &j.connections {
            for road_id in [&c.incoming_road, &c.connecting_road] {
                if m.road(road_id).is_none() {
                    return dangling(format!("junction {} connection {} references road {road_id}", j.id, c.id));
                }
            }
        }
    }
    Ok(())
}
